#include "pronsim/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>

namespace pronsim {

Scorer make_rank_scorer(std::shared_ptr<const RankModel> model) {
  auto memo = std::make_shared<std::map<Pronunciation, Tensor>>();
  return [model, memo](const Pronunciation& a, const Pronunciation& b) {
    auto embed = [&](const Pronunciation& p) -> const Tensor& {
      auto it = memo->find(p);
      if (it == memo->end())
        it = memo->emplace(p, embed_pronunciation(p, *model)).first;
      return it->second;
    };
    return cosine_similarity01(embed(a), embed(b));
  };
}

Scorer make_binary_scorer(std::shared_ptr<const BinaryModel> model) {
  // Sequences longer than the model's fixed t_max are truncated; warn once.
  auto warned = std::make_shared<bool>(false);
  return [model, warned](const Pronunciation& a, const Pronunciation& b) {
    auto clip = [&](const Pronunciation& p) {
      if (p.size() <= model->t_max) return p;
      if (!*warned) {
        std::fputs("warning: truncating sequences longer than model t_max\n",
                   stderr);
        *warned = true;
      }
      return Pronunciation(p.begin(), p.begin() + model->t_max);
    };
    return binary_score(clip(a), clip(b), *model);
  };
}

Scorer make_levenshtein_scorer() {
  return [](const Pronunciation& a, const Pronunciation& b) {
    return -static_cast<double>(levenshtein(a, b));
  };
}

Scorer make_exact_scorer() {
  return [](const Pronunciation& a, const Pronunciation& b) {
    return a == b ? 1.0 : 0.0;
  };
}

std::vector<std::string> lexical_access_topk(const Pronunciation& surface,
                                             const Lexicon& lex,
                                             const Scorer& scorer,
                                             std::size_t k) {
  if (k == 0 || k > lex.size())
    throw std::invalid_argument("lexical_access_topk: k out of range");
  std::vector<double> scores(lex.size());
  for (std::size_t i = 0; i < lex.size(); ++i)
    scores[i] = scorer(surface, lex.entry(i).canonical);
  std::vector<std::size_t> order(lex.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(lex.entry(order[i]).word);
  return out;
}

double wer_at_k(const Corpus& examples, const Lexicon& lex,
                const Scorer& scorer, std::size_t k) {
  if (examples.empty()) throw std::invalid_argument("wer_at_k: no examples");
  std::size_t errors = 0;
  for (const auto& ex : examples) {
    const auto top = lexical_access_topk(ex.surface, lex, scorer, k);
    if (std::find(top.begin(), top.end(), ex.word) == top.end()) ++errors;
  }
  return 100.0 * static_cast<double>(errors) /
         static_cast<double>(examples.size());
}

EvalReport evaluate(const Corpus& examples, const Lexicon& lex,
                    const Scorer& scorer) {
  if (examples.empty()) throw std::invalid_argument("evaluate: no examples");
  const std::size_t k = std::min<std::size_t>(2, lex.size());
  EvalReport report;
  std::size_t err1 = 0, err2 = 0;
  for (const auto& ex : examples) {
    auto top = lexical_access_topk(ex.surface, lex, scorer, k);
    if (top.empty() || top[0] != ex.word) ++err1;
    if (std::find(top.begin(), top.end(), ex.word) == top.end()) ++err2;
    report.rows.push_back({ex.word, std::move(top)});
  }
  report.example_count = examples.size();
  report.wer1 = 100.0 * static_cast<double>(err1) / static_cast<double>(examples.size());
  report.wer2 = 100.0 * static_cast<double>(err2) / static_cast<double>(examples.size());
  return report;
}

std::vector<std::string> word_neighborhood(const std::string& word,
                                           const Lexicon& lex,
                                           const Scorer& scorer, double theta,
                                           NeighborhoodMode mode) {
  const auto idx = lex.find(word);
  if (!idx) throw std::invalid_argument("word not in lexicon: " + word);
  const Pronunciation& pw = lex.entry(*idx).canonical;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < lex.size(); ++i) {
    const auto& e = lex.entry(i);
    const double f = scorer(pw, e.canonical);
    if (mode == NeighborhoodMode::SimilarityAtLeast) {
      if (e.word != word && f >= theta) out.push_back(e.word);
    } else {
      if (f < theta) out.push_back(e.word);
    }
  }
  return out;
}

std::vector<std::string> nearest_words(const std::string& word,
                                       const Lexicon& lex, const Scorer& scorer,
                                       std::size_t m) {
  const auto idx = lex.find(word);
  if (!idx) throw std::invalid_argument("word not in lexicon: " + word);
  if (m == 0 || m > lex.size() - 1)
    throw std::invalid_argument("nearest_words: m out of range");
  const Pronunciation& pw = lex.entry(*idx).canonical;
  std::vector<std::size_t> order;
  std::vector<double> scores(lex.size());
  for (std::size_t i = 0; i < lex.size(); ++i) {
    if (i == *idx) continue;
    scores[i] = scorer(pw, lex.entry(i).canonical);
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(lex.entry(order[i]).word);
  return out;
}

namespace {

// Dominant eigenvector of the symmetric matrix c by power iteration.
// Returns the eigenvalue; v holds the (sign-fixed) unit eigenvector.
double power_iteration(const Tensor& c, std::vector<double>& v, Rng& rng) {
  const std::size_t n = c.rows();
  v.resize(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  std::vector<double> next(n);
  double eig = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += c.at(i, j) * v[j];
      next[i] = s;
    }
    double norm = 0.0;
    for (double x : next) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= norm;
      delta = std::max(delta, std::abs(std::abs(next[i]) - std::abs(v[i])));
    }
    v = next;
    eig = norm;
    if (delta < 1e-10 && iter > 2) break;
  }
  // Fix sign: largest-magnitude coordinate positive.
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  if (v[arg] < 0.0)
    for (auto& x : v) x = -x;
  return eig;
}

}  // namespace

std::vector<ProjectedPoint> project_embeddings_2d(
    const std::vector<std::string>& words,
    const std::vector<Tensor>& embeddings) {
  const std::size_t m = embeddings.size();
  if (m < 3 || words.size() != m)
    throw std::invalid_argument("project: need >= 3 labeled embeddings");
  const std::size_t n = embeddings[0].size();
  for (const auto& e : embeddings)
    if (e.size() != n) throw std::invalid_argument("project: ragged embeddings");

  std::vector<double> mean(n, 0.0);
  for (const auto& e : embeddings)
    for (std::size_t j = 0; j < n; ++j) mean[j] += e[j];
  for (auto& x : mean) x /= static_cast<double>(m);

  Tensor centered = Tensor::mat(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      centered.at(i, j) = embeddings[i][j] - mean[j];

  Tensor cov = Tensor::mat(n, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < n; ++a) {
      const double va = centered.at(i, a);
      if (va == 0.0) continue;
      for (std::size_t b = 0; b < n; ++b)
        cov.at(a, b) += va * centered.at(i, b);
    }
  for (auto& x : cov.data) x /= static_cast<double>(m - 1);

  Rng rng(0x9c0ffee1);
  std::vector<double> v1, v2;
  const double e1 = power_iteration(cov, v1, rng);
  if (e1 <= 1e-12)
    throw std::invalid_argument("project: degenerate input (no variance)");
  // Deflate and repeat for the second component.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) cov.at(a, b) -= e1 * v1[a] * v1[b];
  power_iteration(cov, v2, rng);

  std::vector<ProjectedPoint> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    ProjectedPoint p;
    p.word = words[i];
    for (std::size_t j = 0; j < n; ++j) {
      p.x += centered.at(i, j) * v1[j];
      p.y += centered.at(i, j) * v2[j];
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace pronsim
