#include "pronsim/train.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "pronsim/tasks.hpp"

namespace pronsim {

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw std::invalid_argument("learning_rate < 0");
  if (margin <= 0.0) throw std::invalid_argument("margin must be positive");
  if (negatives_per_positive == 0)
    throw std::invalid_argument("negatives_per_positive must be positive");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (adagrad_epsilon <= 0.0)
    throw std::invalid_argument("adagrad_epsilon must be positive");
}

namespace {

using SurfaceIndex = std::unordered_map<std::string, std::vector<Pronunciation>>;

SurfaceIndex build_surface_index(const Corpus& corpus) {
  SurfaceIndex idx;
  for (const auto& ex : corpus) idx[ex.word].push_back(ex.surface);
  return idx;
}

Pronunciation draw_negative(const std::string& positive_word,
                            const Lexicon& lex, const SurfaceIndex* surfaces,
                            const TrainConfig& cfg, Rng& rng) {
  constexpr int kMaxRetries = 1000;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const auto& entry = lex.entry(rng.below(lex.size()));
    if (entry.word == positive_word) continue;
    if (cfg.negative_mode == NegativeMode::Canonical) return entry.canonical;
    auto it = surfaces->find(entry.word);
    if (it == surfaces->end() || it->second.empty()) continue;
    return it->second[rng.below(it->second.size())];
  }
  throw std::runtime_error(
      "could not sample a negative pronunciation for word '" + positive_word +
      "' (no other word has usable pronunciations)");
}

std::vector<Triplet> sample_negatives_indexed(const CorpusExample& example,
                                              const Lexicon& lex,
                                              const SurfaceIndex* surfaces,
                                              const TrainConfig& cfg,
                                              Rng& rng) {
  const auto own = lex.find(example.word);
  if (!own) throw std::invalid_argument("example word not in lexicon: " + example.word);
  if (lex.size() < 2)
    throw std::invalid_argument("lexicon must have at least 2 words");
  const Pronunciation& positive = lex.entry(*own).canonical;
  std::vector<Triplet> out;
  out.reserve(cfg.negatives_per_positive);
  for (std::size_t i = 0; i < cfg.negatives_per_positive; ++i)
    out.push_back({example.surface, positive,
                   draw_negative(example.word, lex, surfaces, cfg, rng)});
  return out;
}

}  // namespace

std::vector<Triplet> sample_negatives(const CorpusExample& example,
                                      const Lexicon& lex, const Corpus& corpus,
                                      const TrainConfig& cfg, Rng& rng) {
  SurfaceIndex idx;
  const SurfaceIndex* idx_ptr = nullptr;
  if (cfg.negative_mode == NegativeMode::Surface) {
    idx = build_surface_index(corpus);
    idx_ptr = &idx;
  }
  return sample_negatives_indexed(example, lex, idx_ptr, cfg, rng);
}

std::vector<LabeledPair> make_pair_dataset(const Corpus& corpus,
                                           const Lexicon& lex,
                                           const TrainConfig& cfg, Rng& rng) {
  SurfaceIndex idx;
  const SurfaceIndex* idx_ptr = nullptr;
  if (cfg.negative_mode == NegativeMode::Surface) {
    idx = build_surface_index(corpus);
    idx_ptr = &idx;
  }
  std::vector<LabeledPair> out;
  for (const auto& ex : corpus) {
    const auto own = lex.find(ex.word);
    if (!own) throw std::invalid_argument("example word not in lexicon: " + ex.word);
    out.push_back({ex.surface, lex.entry(*own).canonical, +1});
    for (std::size_t i = 0; i < cfg.negatives_per_positive; ++i)
      out.push_back({ex.surface, draw_negative(ex.word, lex, idx_ptr, cfg, rng),
                     -1});
  }
  return out;
}

void adagrad_update(Parameter& param, const TrainConfig& cfg) {
  for (std::size_t i = 0; i < param.value.size(); ++i) {
    const double g = param.grad[i];
    param.acc[i] += g * g;
    param.value[i] -=
        cfg.learning_rate * g / (std::sqrt(param.acc[i]) + cfg.adagrad_epsilon);
  }
  param.zero_grad();
}

namespace {

void check_finite(double loss, std::size_t epoch, std::size_t batch) {
  if (!std::isfinite(loss))
    throw std::runtime_error("non-finite loss in epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(batch));
}

template <typename Model, typename EpochFn, typename ScorerFn>
TrainReport fit_loop(Model& model, const Corpus& train, const Lexicon& lex,
                     const Corpus& dev, const TrainConfig& cfg,
                     EpochFn run_epoch, ScorerFn make_scorer) {
  cfg.validate();
  if (train.empty() || dev.empty())
    throw std::invalid_argument("fit: train and dev sets must be non-empty");

  TrainReport report;
  Model best = model;
  double best_wer1 = 0.0;
  const Rng base(cfg.seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = base.stream(1000 + epoch);
    TrainReport::Epoch row;
    row.mean_loss = run_epoch(epoch, rng);

    const Scorer scorer = make_scorer();
    row.dev_wer1 = wer_at_k(dev, lex, scorer, 1);
    row.dev_wer2 = wer_at_k(dev, lex, scorer, std::min<std::size_t>(2, lex.size()));
    report.epochs.push_back(row);

    if (epoch == 0 || row.dev_wer1 < best_wer1) {
      best_wer1 = row.dev_wer1;
      best = model;
      report.selected_epoch = epoch;
    }
  }
  model = std::move(best);
  return report;
}

}  // namespace

TrainReport fit(RankModel& model, const Corpus& train, const Lexicon& lex,
                const Corpus& dev, const TrainConfig& cfg) {
  SurfaceIndex surf_idx;
  const SurfaceIndex* surf = nullptr;
  if (cfg.negative_mode == NegativeMode::Surface) {
    surf_idx = build_surface_index(train);
    surf = &surf_idx;
  }
  auto params = model.params();

  auto run_epoch = [&](std::size_t epoch, Rng& rng) {
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t epoch_triplets = 0;
    for (std::size_t start = 0, batch = 0; start < order.size();
         start += cfg.batch_size, ++batch) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      const double scale =
          1.0 / static_cast<double>((end - start) * cfg.negatives_per_positive);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = train[order[i]];
        const auto triplets =
            sample_negatives_indexed(ex, lex, surf, cfg, rng);
        std::vector<Pronunciation> negatives;
        negatives.reserve(triplets.size());
        for (const auto& t : triplets) negatives.push_back(t.negative);
        const auto res =
            triplet_group_loss(ex.surface, triplets.front().positive,
                               negatives, model, cfg.margin, true, scale);
        batch_loss += res.total_loss;
        epoch_triplets += negatives.size();
      }
      check_finite(batch_loss, epoch, batch);
      epoch_loss += batch_loss;
      for (Parameter* p : params) adagrad_update(*p, cfg);
    }
    return epoch_loss / static_cast<double>(epoch_triplets);
  };

  auto make_scorer = [&model]() {
    return make_rank_scorer(
        std::shared_ptr<const RankModel>(std::shared_ptr<void>(), &model));
  };
  return fit_loop(model, train, lex, dev, cfg, run_epoch, make_scorer);
}

TrainReport fit(BinaryModel& model, const Corpus& train, const Lexicon& lex,
                const Corpus& dev, const TrainConfig& cfg) {
  auto params = model.params();

  auto run_epoch = [&](std::size_t epoch, Rng& rng) {
    auto pairs = make_pair_dataset(train, lex, cfg, rng);
    rng.shuffle(pairs);

    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch = 0; start < pairs.size();
         start += cfg.batch_size, ++batch) {
      const std::size_t end = std::min(start + cfg.batch_size, pairs.size());
      const double scale = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i)
        batch_loss += binary_loss(pairs[i], model, true, scale);
      check_finite(batch_loss, epoch, batch);
      epoch_loss += batch_loss;
      for (Parameter* p : params) adagrad_update(*p, cfg);
    }
    return epoch_loss / static_cast<double>(pairs.size());
  };

  auto make_scorer = [&model]() {
    return make_binary_scorer(
        std::shared_ptr<const BinaryModel>(std::shared_ptr<void>(), &model));
  };
  return fit_loop(model, train, lex, dev, cfg, run_epoch, make_scorer);
}

double margin_violation_rate(const RankModel& model, const Corpus& corpus,
                             const Lexicon& lex, const TrainConfig& cfg,
                             Rng& rng) {
  SurfaceIndex surf_idx;
  const SurfaceIndex* surf = nullptr;
  if (cfg.negative_mode == NegativeMode::Surface) {
    surf_idx = build_surface_index(corpus);
    surf = &surf_idx;
  }
  std::size_t total = 0, violated = 0;
  auto& mutable_model = const_cast<RankModel&>(model);  // backward=false path
  for (const auto& ex : corpus) {
    const auto triplets = sample_negatives_indexed(ex, lex, surf, cfg, rng);
    std::vector<Pronunciation> negatives;
    for (const auto& t : triplets) negatives.push_back(t.negative);
    const auto res =
        triplet_group_loss(ex.surface, triplets.front().positive, negatives,
                           mutable_model, cfg.margin, false);
    total += negatives.size();
    violated += res.violations;
  }
  return static_cast<double>(violated) / static_cast<double>(total);
}

std::string format_train_report(const TrainReport& report) {
  std::ostringstream os;
  os << "epoch\tmean_loss\tdev_wer1\tdev_wer2\n";
  for (std::size_t i = 0; i < report.epochs.size(); ++i) {
    const auto& e = report.epochs[i];
    os << i << '\t' << e.mean_loss << '\t' << e.dev_wer1 << '\t' << e.dev_wer2
       << '\n';
  }
  os << "selected_epoch\t" << report.selected_epoch << '\n';
  return os.str();
}

}  // namespace pronsim
