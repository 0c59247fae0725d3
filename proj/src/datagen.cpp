#include "pronsim/datagen.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pronsim {

void GenConfig::validate() const {
  for (const auto& r : rules)
    if (r.probability < 0.0 || r.probability > 1.0)
      throw std::invalid_argument("rule probability outside [0, 1]");
  if (variants_per_word == 0)
    throw std::invalid_argument("variants_per_word must be positive");
  if (train_frac <= 0.0 || dev_frac <= 0.0 || test_frac <= 0.0)
    throw std::invalid_argument("split fractions must be positive");
  if (std::abs(train_frac + dev_frac + test_frac - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
}

std::vector<NoiseRule> parse_rules(const std::string& text,
                                   const PhoneInventory& inv) {
  std::vector<NoiseRule> rules;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind_s, target_s, repl_s, prob_s;
    if (!(ls >> kind_s >> target_s >> repl_s >> prob_s))
      throw ParseError("rules line " + std::to_string(line_no) +
                       ": expected 4 fields");
    NoiseRule r;
    if (kind_s == "substitute")
      r.kind = RuleKind::Substitute;
    else if (kind_s == "delete")
      r.kind = RuleKind::Delete;
    else if (kind_s == "insert")
      r.kind = RuleKind::Insert;
    else
      throw ParseError("rules line " + std::to_string(line_no) +
                       ": unknown kind '" + kind_s + "'");

    auto resolve = [&](const std::string& sym) {
      const auto id = inv.find(sym);
      if (!id)
        throw ParseError("rules line " + std::to_string(line_no) +
                         ": unknown phone '" + sym + "'");
      return *id;
    };
    if (r.kind == RuleKind::Insert) {
      if (target_s != "anywhere")
        throw ParseError("rules line " + std::to_string(line_no) +
                         ": insert target must be 'anywhere'");
    } else {
      r.target = resolve(target_s);
    }
    if (r.kind == RuleKind::Delete) {
      if (repl_s != "-")
        throw ParseError("rules line " + std::to_string(line_no) +
                         ": delete replacement must be '-'");
    } else {
      r.replacement = resolve(repl_s);
    }
    try {
      r.probability = std::stod(prob_s);
    } catch (const std::exception&) {
      throw ParseError("rules line " + std::to_string(line_no) +
                       ": bad probability '" + prob_s + "'");
    }
    if (r.probability < 0.0 || r.probability > 1.0)
      throw ParseError("rules line " + std::to_string(line_no) +
                       ": probability outside [0, 1]");
    rules.push_back(r);
  }
  return rules;
}

std::string format_rules(const std::vector<NoiseRule>& rules,
                         const PhoneInventory& inv) {
  std::ostringstream os;
  for (const auto& r : rules) {
    switch (r.kind) {
      case RuleKind::Substitute: os << "substitute\t" << inv.symbol(r.target); break;
      case RuleKind::Delete: os << "delete\t" << inv.symbol(r.target); break;
      case RuleKind::Insert: os << "insert\tanywhere"; break;
    }
    os << '\t'
       << (r.replacement >= 0 ? inv.symbol(r.replacement) : std::string("-"))
       << '\t' << r.probability << '\n';
  }
  return os.str();
}

Pronunciation apply_rules(const Pronunciation& canonical, const GenConfig& cfg,
                          Rng& rng) {
  Pronunciation out;
  for (std::size_t pos = 0; pos < canonical.size(); ++pos) {
    PhoneId cur = canonical[pos];
    bool deleted = false;
    std::vector<PhoneId> inserts;
    for (const auto& r : cfg.rules) {
      if (deleted) break;
      switch (r.kind) {
        case RuleKind::Substitute:
          if (cur == r.target && rng.uniform() < r.probability)
            cur = r.replacement;
          break;
        case RuleKind::Delete:
          if (cur == r.target && rng.uniform() < r.probability) {
            // never delete the last chance of a non-empty output
            if (!out.empty() || pos + 1 < canonical.size()) deleted = true;
          }
          break;
        case RuleKind::Insert:
          if (rng.uniform() < r.probability) inserts.push_back(r.replacement);
          break;
      }
    }
    if (!deleted) out.push_back(cur);
    for (PhoneId id : inserts) out.push_back(id);
  }
  if (out.empty()) out = canonical;  // all-deleted fallback
  return out;
}

SynthCorpus synth_corpus(const Lexicon& lex, const GenConfig& cfg) {
  cfg.validate();
  if (lex.size() == 0) throw std::invalid_argument("empty lexicon");
  const std::size_t n = lex.size();

  const Rng base(cfg.seed);
  Rng split_rng = base.stream(1);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  split_rng.shuffle(order);

  std::size_t n_train = static_cast<std::size_t>(std::llround(cfg.train_frac * n));
  std::size_t n_dev = static_cast<std::size_t>(std::llround(cfg.dev_frac * n));
  if (n_train + n_dev >= n) {
    if (n_train + n_dev > n) n_train = n - n_dev;
  }
  const std::size_t n_test = n - n_train - n_dev;
  if (n_train == 0 || n_dev == 0 || n_test == 0)
    throw std::invalid_argument("split produces an empty partition");

  // Split membership per word, output ordered by lexicon index.
  std::vector<int> split(n);
  for (std::size_t i = 0; i < n; ++i)
    split[order[i]] = i < n_train ? 0 : (i < n_train + n_dev ? 1 : 2);

  SynthCorpus out;
  for (std::size_t w = 0; w < n; ++w) {
    Rng word_rng = base.stream(1000 + w);
    Corpus& dst = split[w] == 0 ? out.train : (split[w] == 1 ? out.dev : out.test);
    for (std::size_t v = 0; v < cfg.variants_per_word; ++v)
      dst.push_back({lex.entry(w).word,
                     apply_rules(lex.entry(w).canonical, cfg, word_rng)});
  }
  return out;
}

namespace {

const char* const kConsonants[] = {"p", "b", "t", "d", "k", "g", "m", "n",
                                   "s", "z", "f", "v", "l", "r", "w", "y",
                                   "sh", "ch", "th", "hh"};
const char* const kPlainVowels[] = {"ae", "ah", "iy", "ow", "ey", "er", "ay"};
// Confusable pairs: the default rules rewrite each member to a distinct
// surface-only nasalized variant, so edit distance cannot tell the pair
// apart but the surface phone identity can.
const char* const kContrastPairs[][2] = {{"eh", "ih"}, {"aa", "ao"}, {"uw", "uh"}};
const char* const kSurfaceOnly[] = {"eh_n", "ih_n", "aa_n", "ao_n",
                                    "uw_n", "uh_n", "ax", "q", "dx"};

}  // namespace

PhoneInventory default_inventory() {
  std::vector<std::string> symbols;
  for (const char* s : kConsonants) symbols.push_back(s);
  for (const char* s : kPlainVowels) symbols.push_back(s);
  for (const auto& pair : kContrastPairs) {
    symbols.push_back(pair[0]);
    symbols.push_back(pair[1]);
  }
  for (const char* s : kSurfaceOnly) symbols.push_back(s);
  return PhoneInventory(std::move(symbols));
}

std::vector<NoiseRule> default_rules(const PhoneInventory& inv) {
  const std::string text =
      "substitute\teh\teh_n\t0.75\n"
      "substitute\tih\tih_n\t0.75\n"
      "substitute\taa\taa_n\t0.75\n"
      "substitute\tao\tao_n\t0.75\n"
      "substitute\tuw\tuw_n\t0.75\n"
      "substitute\tuh\tuh_n\t0.75\n"
      "substitute\tah\tax\t0.5\n"
      "delete\tt\t-\t0.3\n"
      "delete\td\t-\t0.3\n"
      "insert\tanywhere\tq\t0.03\n";
  return parse_rules(text, inv);
}

Lexicon synth_lexicon(const PhoneInventory& inv, std::size_t n_words,
                      Rng& rng) {
  if (n_words < 2) throw std::invalid_argument("need at least 2 words");
  auto id = [&inv](const char* s) {
    const auto found = inv.find(s);
    if (!found) throw std::invalid_argument("inventory lacks phone " + std::string(s));
    return *found;
  };

  std::set<Pronunciation> seen;
  std::vector<LexiconEntry> entries;

  auto name_of = [&inv](const Pronunciation& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) s += '-';
      s += inv.symbol(p[i]);
    }
    return s;
  };
  auto push_if_new = [&](const Pronunciation& p) {
    if (!seen.insert(p).second) return false;
    entries.push_back({name_of(p), p});
    return true;
  };
  auto rand_c = [&] { return id(kConsonants[rng.below(std::size(kConsonants))]); };
  auto rand_v = [&] { return id(kPlainVowels[rng.below(std::size(kPlainVowels))]); };

  while (entries.size() < n_words) {
    const bool pair = entries.size() + 1 < n_words && rng.uniform() < 0.7;
    // Skeleton: C _ C with optional extra syllable; '_' is the vowel slot
    // that carries the contrast in pair mode.
    Pronunciation skel{rand_c(), -1, rand_c()};
    if (rng.uniform() < 0.5) {
      skel.push_back(rand_v());
      skel.push_back(rand_c());
    }
    const std::size_t slot = 1;
    if (pair) {
      const auto& contrast = kContrastPairs[rng.below(std::size(kContrastPairs))];
      Pronunciation a = skel, b = skel;
      a[slot] = id(contrast[0]);
      b[slot] = id(contrast[1]);
      if (seen.count(a) || seen.count(b)) continue;
      push_if_new(a);
      push_if_new(b);
    } else {
      Pronunciation a = skel;
      a[slot] = rand_v();
      push_if_new(a);
    }
  }
  return Lexicon(std::move(entries));
}

}  // namespace pronsim
