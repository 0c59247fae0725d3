// End-to-end acceptance checks.  Each criterion prints one [PASS]/[FAIL]
// line; the exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pronsim/checkpoint.hpp"
#include "pronsim/datagen.hpp"
#include "pronsim/gradcheck.hpp"
#include "pronsim/models.hpp"
#include "pronsim/tasks.hpp"
#include "pronsim/train.hpp"

using namespace pronsim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Pronunciation random_seq(Rng& rng, std::size_t max_phone, std::size_t min_len,
                         std::size_t max_len) {
  Pronunciation p(min_len + rng.below(max_len - min_len + 1));
  for (auto& id : p) id = static_cast<PhoneId>(rng.below(max_phone));
  return p;
}

std::size_t dp_oracle(const Pronunciation& a, const Pronunciation& b) {
  std::vector<std::vector<std::size_t>> d(
      a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1),
                          d[i - 1][j] + 1, d[i][j - 1] + 1});
  return d[a.size()][b.size()];
}

Lexicon grid_lexicon(std::size_t n) {
  std::vector<LexiconEntry> entries;
  for (std::size_t i = 0; i < n; ++i)
    entries.push_back({"w" + std::to_string(i),
                       {static_cast<PhoneId>(i / 10),
                        static_cast<PhoneId>(i % 10)}});
  return Lexicon(std::move(entries));
}

Scorer hash_scorer(std::uint64_t salt) {
  return [salt](const Pronunciation& a, const Pronunciation& b) {
    std::uint64_t h = salt;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
      h ^= h >> 33;
    };
    for (PhoneId p : a) mix(static_cast<std::uint64_t>(p) + 1);
    mix(0xabcdef);
    for (PhoneId p : b) mix(static_cast<std::uint64_t>(p) + 1);
    return static_cast<double>(h % 10007) / 10007.0;
  };
}

// The fixed synthetic task shared by criteria 4 and 5.
struct SynthTask {
  PhoneInventory inv = default_inventory();
  Lexicon lex;
  SynthCorpus corpus;

  SynthTask() : lex(make_lexicon()), corpus(make_corpus()) {}

  Lexicon make_lexicon() {
    Rng rng(20240601);
    return synth_lexicon(inv, 100, rng);
  }
  SynthCorpus make_corpus() {
    GenConfig cfg;
    cfg.rules = default_rules(inv);
    cfg.variants_per_word = 10;
    cfg.seed = 20240602;
    return synth_corpus(lex, cfg);
  }
};

RankModel train_rank(const SynthTask& task, std::size_t negatives,
                     std::size_t epochs, std::uint64_t seed) {
  Rng init = Rng(seed).stream(7);
  RankModel model = RankModel::init(encoder_config_from_name("2lstm", 64, 32),
                                    task.inv.size(), 120, false, init);
  TrainConfig cfg;
  cfg.negatives_per_positive = negatives;
  cfg.epochs = epochs;
  cfg.seed = seed;
  fit(model, task.corpus.train, task.lex, task.corpus.dev, cfg);
  return model;
}

Scorer scorer_of(const RankModel& model) {
  return make_rank_scorer(
      std::shared_ptr<const RankModel>(std::shared_ptr<void>(), &model));
}

bool criterion1() {
  const auto start = Clock::now();
  const std::uint64_t seeds[] = {1, 2, 3, 4, 5};
  const auto checks = run_model_grad_checks(seeds);
  const double elapsed = seconds_since(start);
  const bool ok = all_grad_checks_pass(checks) && elapsed < 300.0;
  std::printf("%s 1: gradient integrity (%zu model checks, %.1fs)\n",
              ok ? "[PASS]" : "[FAIL]", checks.size(), elapsed);
  if (!all_grad_checks_pass(checks))
    std::fputs(format_grad_checks(checks).c_str(), stdout);
  return ok;
}

bool criterion2() {
  bool ok = true;
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_seq(rng, 8, 1, 10);
    const auto b = random_seq(rng, 8, 1, 10);
    if (levenshtein(a, b) != dp_oracle(a, b)) ok = false;
  }

  const Lexicon lex = grid_lexicon(20);
  for (int trial = 0; trial < 100 && ok; ++trial) {
    const Scorer scorer = hash_scorer(rng.next_u64());
    const Pronunciation surface = random_seq(rng, 10, 1, 4);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < lex.size(); ++i)
      scored.push_back({scorer(surface, lex.entry(i).canonical), i});
    std::stable_sort(scored.begin(), scored.end(),
                     [](auto& a, auto& b) { return a.first > b.first; });

    const std::size_t k = 1 + rng.below(20);
    const auto topk = lexical_access_topk(surface, lex, scorer, k);
    for (std::size_t i = 0; i < k; ++i)
      if (topk[i] != lex.entry(scored[i].second).word) ok = false;

    // nearest_words oracle from word w0's canonical.
    const Pronunciation& pw = lex.entry(0).canonical;
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t i = 1; i < lex.size(); ++i)
      near.push_back({scorer(pw, lex.entry(i).canonical), i});
    std::stable_sort(near.begin(), near.end(),
                     [](auto& a, auto& b) { return a.first > b.first; });
    const auto got = nearest_words("w0", lex, scorer, 19);
    for (std::size_t i = 0; i < 19; ++i)
      if (got[i] != lex.entry(near[i].second).word) ok = false;

    // word_neighborhood vs exhaustive filtering, both modes.
    const double theta = rng.uniform(0.0, 1.0);
    const auto at_least = word_neighborhood(
        "w0", lex, scorer, theta, NeighborhoodMode::SimilarityAtLeast);
    const auto literal = word_neighborhood("w0", lex, scorer, theta,
                                           NeighborhoodMode::Literal);
    std::vector<std::string> want_al, want_lit;
    for (std::size_t i = 0; i < lex.size(); ++i) {
      const double f = scorer(pw, lex.entry(i).canonical);
      if (i != 0 && f >= theta) want_al.push_back(lex.entry(i).word);
      if (f < theta) want_lit.push_back(lex.entry(i).word);
    }
    if (at_least != want_al || literal != want_lit) ok = false;
  }
  std::printf("%s 2: oracle equivalence\n", ok ? "[PASS]" : "[FAIL]");
  return ok;
}

bool criterion3() {
  auto close = [](double a, double b) { return std::abs(a - b) < 1e-8; };
  bool ok = true;

  Tensor u = Tensor::vec(3), v = Tensor::vec(3);
  u.data = {2.0, -1.0, 0.5};
  ok = ok && close(cosine_similarity01(u, u), 1.0);
  u.data = {1.0, 0.0, 0.0};
  v.data = {0.0, 2.0, 0.0};
  ok = ok && close(cosine_similarity01(u, v), 0.5);
  v.data = {-3.0, 0.0, 0.0};
  ok = ok && close(cosine_similarity01(u, v), 0.0);

  ok = ok && close(hinge_loss(0.3, 1.0, 0.0), 0.0);
  ok = ok && close(hinge_loss(0.3, 0.0, 1.0), 1.3);
  ok = ok && close(hinge_loss(0.3, 0.6, 0.4), 0.1);
  ok = ok && close(hinge_loss(0.3, 0.5, 0.5), 0.3);

  ok = ok && close(softmax_nll(Tensor::vec(2), 0).loss, std::log(2.0));

  TrainConfig cfg;  // lr 0.01, eps 1e-8
  Parameter p("p", Tensor::vec(1));
  p.value[0] = 1.0;
  p.grad[0] = 2.0;
  adagrad_update(p, cfg);
  ok = ok && close(p.value[0], 1.0 - 0.01 * 2.0 / (2.0 + 1e-8));
  ok = ok && close(p.acc[0], 4.0);

  std::printf("%s 3: analytic cases\n", ok ? "[PASS]" : "[FAIL]");
  return ok;
}

// Shared state between criteria 4 and 5 so the expensive 50-negative run
// happens once.
struct TrainedOutcome {
  double wer_rank50 = -1.0;
  bool trained = false;
};
TrainedOutcome g_outcome;

bool criterion4(const SynthTask& task) {
  const auto start = Clock::now();
  RankModel model = train_rank(task, 50, 30, 71);
  const double wer_rank = wer_at_k(task.corpus.test, task.lex,
                                   scorer_of(model), 1);
  const double wer_lev =
      wer_at_k(task.corpus.test, task.lex, make_levenshtein_scorer(), 1);
  const double wer_exact =
      wer_at_k(task.corpus.test, task.lex, make_exact_scorer(), 1);

  TrainConfig cfg;
  Rng viol_rng(4004);
  const double violations =
      margin_violation_rate(model, task.corpus.train, task.lex, cfg, viol_rng);
  const double elapsed = seconds_since(start);

  g_outcome.wer_rank50 = wer_rank;
  g_outcome.trained = true;

  const bool ok = wer_rank < wer_lev && wer_rank < wer_exact &&
                  violations < 0.10 && elapsed < 900.0;
  std::printf(
      "%s 4: end-to-end learning (rank %.1f%% vs levenshtein %.1f%% / exact "
      "%.1f%% WER@1, violations %.1f%%, %.0fs)\n",
      ok ? "[PASS]" : "[FAIL]", wer_rank, wer_lev, wer_exact,
      100.0 * violations, elapsed);
  return ok;
}

bool criterion5(const SynthTask& task) {
  // Shorter runs suffice for the trend; the 50-negative endpoint reuses the
  // full criterion-4 model when available.
  const std::size_t sweep[] = {1, 5, 10, 25};
  const std::size_t epochs = 10;
  std::vector<double> wers;
  for (std::size_t n : sweep) {
    RankModel model = train_rank(task, n, epochs, 71);
    wers.push_back(wer_at_k(task.corpus.test, task.lex, scorer_of(model), 1));
  }
  double wer50 = g_outcome.wer_rank50;
  if (!g_outcome.trained) {
    RankModel model = train_rank(task, 50, epochs, 71);
    wer50 = wer_at_k(task.corpus.test, task.lex, scorer_of(model), 1);
  }
  wers.push_back(wer50);

  const bool ok = wers.back() <= wers.front();
  std::printf("%s 5: negative-sampling trend (WER@1:", ok ? "[PASS]" : "[FAIL]");
  for (double w : wers) std::printf(" %.1f", w);
  std::printf(")\n");
  return ok;
}

bool criterion6(const SynthTask& task) {
  bool ok = true;

  // WER@1 >= WER@2 across scorers and corpora.
  for (const Scorer& s : {make_levenshtein_scorer(), make_exact_scorer(),
                          hash_scorer(66)}) {
    for (const Corpus* c : {&task.corpus.dev, &task.corpus.test}) {
      const auto report = evaluate(*c, task.lex, s);
      if (report.wer1 < report.wer2) ok = false;
    }
  }

  // Top-k prefix property.
  Rng rng(6);
  const Scorer scorer = hash_scorer(rng.next_u64());
  for (int i = 0; i < 20; ++i) {
    const Pronunciation surface = random_seq(rng, task.inv.size(), 2, 6);
    const auto top5 = lexical_access_topk(surface, task.lex, scorer, 5);
    const auto top2 = lexical_access_topk(surface, task.lex, scorer, 2);
    if (!std::equal(top2.begin(), top2.end(), top5.begin())) ok = false;
  }

  // Neighborhood monotone in theta (default mode).
  const std::string& word = task.lex.entry(0).word;
  std::size_t prev = task.lex.size();
  for (double theta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto n = word_neighborhood(word, task.lex, scorer, theta,
                                     NeighborhoodMode::SimilarityAtLeast);
    if (n.size() > prev) ok = false;
    prev = n.size();
  }

  // Similarity symmetry and range on 1e4 random pairs of a small model.
  Rng mrng(606);
  RankModel model = RankModel::init(encoder_config_from_name("lstm", 8, 12),
                                    task.inv.size(), 16, false, mrng);
  for (int i = 0; i < 10000; ++i) {
    const Pronunciation a = random_seq(mrng, task.inv.size(), 1, 8);
    const Pronunciation b = random_seq(mrng, task.inv.size(), 1, 8);
    const double f = similarity(a, b, model);
    if (!(f >= 0.0 && f <= 1.0)) ok = false;
    if (std::abs(f - similarity(b, a, model)) > 1e-12) ok = false;
  }

  std::printf("%s 6: structural invariants\n", ok ? "[PASS]" : "[FAIL]");
  return ok;
}

bool criterion7(const SynthTask& task) {
  bool ok = true;

  // Identical seeds give byte-identical corpora.
  GenConfig gen;
  gen.rules = default_rules(task.inv);
  gen.seed = 99;
  const auto c1 = synth_corpus(task.lex, gen);
  const auto c2 = synth_corpus(task.lex, gen);
  if (format_corpus(c1.train, task.inv) != format_corpus(c2.train, task.inv))
    ok = false;

  // Identical seeds give identical checkpoints and reports; tiny run.
  auto run_once = [&](const std::string& path, std::string& report_text) {
    Rng init = Rng(5).stream(7);
    RankModel m = RankModel::init(encoder_config_from_name("lstm", 6, 8),
                                  task.inv.size(), 10, false, init);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.negatives_per_positive = 2;
    cfg.seed = 5;
    Corpus small_train(c1.train.begin(), c1.train.begin() + 40);
    Corpus small_dev(c1.dev.begin(), c1.dev.begin() + 20);
    report_text = format_train_report(
        fit(m, small_train, task.lex, small_dev, cfg));
    save_checkpoint(path, m, task.inv.hash());
    return m;
  };
  const auto dir = std::filesystem::temp_directory_path();
  const std::string pa = (dir / "pronsim_acc_a.ckpt").string();
  const std::string pb = (dir / "pronsim_acc_b.ckpt").string();
  std::string ra, rb;
  RankModel ma = run_once(pa, ra);
  run_once(pb, rb);
  if (ra != rb) ok = false;

  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  if (slurp(pa) != slurp(pb) || slurp(pa).empty()) ok = false;

  // Round trip is bit-exact and reproduces identical scores.
  RankModel loaded = load_rank_checkpoint(pa, task.inv.hash());
  auto pma = ma.params();
  auto pml = loaded.params();
  for (std::size_t i = 0; i < pma.size(); ++i)
    if (pma[i]->value.data != pml[i]->value.data) ok = false;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const Pronunciation a = random_seq(rng, task.inv.size(), 1, 8);
    const Pronunciation b = random_seq(rng, task.inv.size(), 1, 8);
    if (similarity(a, b, ma) != similarity(a, b, loaded)) ok = false;
  }
  std::remove(pa.c_str());
  std::remove(pb.c_str());

  std::printf("%s 7: determinism and persistence\n", ok ? "[PASS]" : "[FAIL]");
  return ok;
}

bool criterion8(const SynthTask& task) {
  bool ok = true;
  GenConfig gen;  // no rules: zero noise
  gen.variants_per_word = 3;
  gen.seed = 8;
  const auto clean = synth_corpus(task.lex, gen);

  for (const Corpus* c : {&clean.train, &clean.dev, &clean.test})
    for (const auto& ex : *c)
      if (!exact_lookup(ex.surface, task.lex) ||
          *exact_lookup(ex.surface, task.lex) != ex.word)
        ok = false;
  if (wer_at_k(clean.test, task.lex, make_exact_scorer(), 1) != 0.0) ok = false;

  // A briefly trained rank model solves the identity task on its own
  // training words: f(p, p) = 1 exactly tops every list.
  Rng init = Rng(88).stream(7);
  RankModel model = RankModel::init(encoder_config_from_name("2lstm", 16, 16),
                                    task.inv.size(), 24, false, init);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.negatives_per_positive = 5;
  cfg.seed = 88;
  fit(model, clean.train, task.lex, clean.dev, cfg);
  if (wer_at_k(clean.train, task.lex, scorer_of(model), 1) != 0.0) ok = false;

  std::printf("%s 8: zero-noise anchor\n", ok ? "[PASS]" : "[FAIL]");
  return ok;
}

}  // namespace

int main() {
  SynthTask task;
  int failures = 0;
  failures += criterion1() ? 0 : 1;
  failures += criterion2() ? 0 : 1;
  failures += criterion3() ? 0 : 1;
  failures += criterion4(task) ? 0 : 1;
  failures += criterion5(task) ? 0 : 1;
  failures += criterion6(task) ? 0 : 1;
  failures += criterion7(task) ? 0 : 1;
  failures += criterion8(task) ? 0 : 1;
  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
