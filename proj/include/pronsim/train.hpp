#pragma once

#include <cstdint>

#include "pronsim/models.hpp"
#include "pronsim/phonology.hpp"

namespace pronsim {

enum class NegativeMode {
  Canonical,  // negative = canonical pronunciation of a different word
  Surface,    // negative = a surface pronunciation of a different word
};

struct TrainConfig {
  double learning_rate = 0.01;
  double margin = 0.3;
  std::size_t negatives_per_positive = 50;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  NegativeMode negative_mode = NegativeMode::Canonical;
  double adagrad_epsilon = 1e-8;

  void validate() const;
};

struct TrainReport {
  struct Epoch {
    double mean_loss = 0.0;
    double dev_wer1 = 0.0;
    double dev_wer2 = 0.0;
  };
  std::vector<Epoch> epochs;
  std::size_t selected_epoch = 0;  // minimal dev WER@1, earliest on ties
};

// Exactly negatives_per_positive triplets for one corpus example.  The
// negative word is uniform over lexicon entries other than the example's
// word; surface mode draws one of that word's corpus surface forms
// (bounded resampling, then error).
std::vector<Triplet> sample_negatives(const CorpusExample& example,
                                      const Lexicon& lex, const Corpus& corpus,
                                      const TrainConfig& cfg, Rng& rng);

// One positive pair plus negatives_per_positive negative pairs per example.
std::vector<LabeledPair> make_pair_dataset(const Corpus& corpus,
                                           const Lexicon& lex,
                                           const TrainConfig& cfg, Rng& rng);

// acc += grad^2; value -= lr * grad / (sqrt(acc) + eps); grad zeroed.
void adagrad_update(Parameter& param, const TrainConfig& cfg);

// Epoch loop with per-epoch negative resampling, minibatch mean gradients,
// Adagrad updates, and dev WER@1 model selection.  The model is left at the
// selected epoch's parameters.
TrainReport fit(RankModel& model, const Corpus& train, const Lexicon& lex,
                const Corpus& dev, const TrainConfig& cfg);
TrainReport fit(BinaryModel& model, const Corpus& train, const Lexicon& lex,
                const Corpus& dev, const TrainConfig& cfg);

// Fraction of freshly resampled triplets with positive hinge loss.
double margin_violation_rate(const RankModel& model, const Corpus& corpus,
                             const Lexicon& lex, const TrainConfig& cfg,
                             Rng& rng);

std::string format_train_report(const TrainReport& report);

}  // namespace pronsim
