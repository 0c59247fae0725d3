#pragma once

#include <cstdint>

#include "pronsim/phonology.hpp"
#include "pronsim/tensor.hpp"

namespace pronsim {

enum class RuleKind { Substitute, Delete, Insert };

struct NoiseRule {
  RuleKind kind = RuleKind::Substitute;
  PhoneId target = -1;       // matched phone; -1 means "anywhere" (insert)
  PhoneId replacement = -1;  // substituted/inserted phone; -1 for delete
  double probability = 0.0;
};

struct GenConfig {
  std::vector<NoiseRule> rules;
  std::size_t variants_per_word = 10;
  double train_frac = 0.7;
  double dev_frac = 0.15;
  double test_frac = 0.15;
  std::uint64_t seed = 1;

  void validate() const;
};

// Rule file: one rule per line, kind<TAB>target<TAB>replacement-or-'-'<TAB>prob.
// Insert rules use the position class "anywhere" as target.
std::vector<NoiseRule> parse_rules(const std::string& text,
                                   const PhoneInventory& inv);
std::string format_rules(const std::vector<NoiseRule>& rules,
                         const PhoneInventory& inv);

// One left-to-right pass; at each phone the rules fire independently in
// order (delete ends the position, substitute rewrites it, insert emits an
// extra phone after it).  A deletion that would leave the whole output
// empty is suppressed.
Pronunciation apply_rules(const Pronunciation& canonical, const GenConfig& cfg,
                          Rng& rng);

struct SynthCorpus {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// variants_per_word surface forms per word, split at the WORD level so no
// word's examples straddle splits.  Deterministic in cfg.seed.
SynthCorpus synth_corpus(const Lexicon& lex, const GenConfig& cfg);

// The default desk-scale task: an ARPAbet-style inventory whose canonical
// words avoid the reduced/nasalized phones that the default rule pack
// introduces, and a lexicon built largely from confusable word pairs that
// differ in a single vowel slot.
PhoneInventory default_inventory();
std::vector<NoiseRule> default_rules(const PhoneInventory& inv);
Lexicon synth_lexicon(const PhoneInventory& inv, std::size_t n_words, Rng& rng);

}  // namespace pronsim
