#pragma once

#include <functional>
#include <memory>

#include "pronsim/models.hpp"
#include "pronsim/phonology.hpp"

namespace pronsim {

// Deterministic similarity oracle f(p1, p2); higher means more similar.
using Scorer =
    std::function<double(const Pronunciation&, const Pronunciation&)>;

// Rank-model scorer with a memo of embeddings, so a lexicon scan costs one
// embedding per query plus one cosine per entry after warm-up.
Scorer make_rank_scorer(std::shared_ptr<const RankModel> model);
Scorer make_binary_scorer(std::shared_ptr<const BinaryModel> model);
// Baselines: negated edit distance, and exact match (1 if equal else 0).
Scorer make_levenshtein_scorer();
Scorer make_exact_scorer();

// Top-k words by f(surface, canonical), descending, lexicon-order ties.
std::vector<std::string> lexical_access_topk(const Pronunciation& surface,
                                             const Lexicon& lex,
                                             const Scorer& scorer,
                                             std::size_t k);

// 100 * (#examples whose word is absent from their top-k) / #examples.
double wer_at_k(const Corpus& examples, const Lexicon& lex,
                const Scorer& scorer, std::size_t k);

struct EvalReport {
  struct Row {
    std::string word;
    std::vector<std::string> predicted;
  };
  std::vector<Row> rows;
  double wer1 = 0.0;
  double wer2 = 0.0;
  std::size_t example_count = 0;
};

EvalReport evaluate(const Corpus& examples, const Lexicon& lex,
                    const Scorer& scorer);

enum class NeighborhoodMode {
  // Evident intent of the definition: words at least theta-similar.
  SimilarityAtLeast,
  // The definition exactly as written: words with similarity below theta.
  Literal,
};

std::vector<std::string> word_neighborhood(const std::string& word,
                                           const Lexicon& lex,
                                           const Scorer& scorer, double theta,
                                           NeighborhoodMode mode);

// m most similar words to word's canonical, excluding word itself.
std::vector<std::string> nearest_words(const std::string& word,
                                       const Lexicon& lex, const Scorer& scorer,
                                       std::size_t m);

struct ProjectedPoint {
  std::string word;
  double x = 0.0;
  double y = 0.0;
};

// Mean-centered projection onto the top-2 principal components
// (power iteration with deflation, 1e-10 convergence).
std::vector<ProjectedPoint> project_embeddings_2d(
    const std::vector<std::string>& words, const std::vector<Tensor>& embeddings);

}  // namespace pronsim
