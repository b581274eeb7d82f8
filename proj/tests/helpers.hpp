#pragma once

// Small builders shared by the unit tests.

#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "itm/cooccur.hpp"
#include "itm/corpus.hpp"
#include "itm/linalg.hpp"

namespace itm::test {

/// Corpus from documents given as word-id lists; `labels` is empty or one per document.
inline Corpus corpus_from_ids(std::size_t V, const std::vector<std::vector<WordId>>& docs,
                              const std::vector<int>& labels = {}, std::size_t num_labels = 0) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < V; ++i) words.push_back("w" + std::to_string(i));
  std::vector<Document> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::map<WordId, std::uint32_t> c;
    for (auto w : docs[d]) ++c[w];
    Document doc;
    for (auto [w, n] : c) doc.counts.push_back({w, n});
    if (!labels.empty() && labels[d] >= 0) doc.label = static_cast<std::size_t>(labels[d]);
    out.push_back(std::move(doc));
  }
  std::vector<std::string> names;
  for (std::size_t k = 0; k < num_labels; ++k) names.push_back("c" + std::to_string(k));
  return Corpus(Vocabulary(std::move(words)), std::move(out), std::move(names));
}

/// Random column-stochastic V x K matrix with entries bounded away from zero.
inline Matrix random_stochastic(Eigen::Index V, Eigen::Index K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix A(V, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index i = 0; i < V; ++i) A(i, k) = u(rng);
    A.col(k) /= A.col(k).sum();
  }
  return A;
}

/// Random symmetric nonnegative K x K matrix with unit mass.
inline Matrix random_pair_matrix(Eigen::Index K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Matrix R(K, K);
  for (Eigen::Index a = 0; a < K; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) R(a, b) = R(b, a) = u(rng);
  return R / R.sum();
}

/// rho * diag(pi) + (1 - rho) * pi pi^T with uniform pi: topics co-occur mostly
/// with themselves, as in real corpora.
inline Matrix assortative_pair_matrix(Eigen::Index K, double rho) {
  const double p = 1.0 / static_cast<double>(K);
  Matrix R = Matrix::Constant(K, K, (1.0 - rho) * p * p);
  R.diagonal().array() += rho * p;
  return R;
}

/// Statistics whose Qbar is exactly `rows` (square, rows in the simplex).
/// Q is a scaled copy; anchor search only reads Qbar and the degenerate flags.
inline CooccurrenceStats stats_from_rows(const RowMatrix& rows) {
  CooccurrenceStats s;
  const auto V = rows.rows();
  s.Qbar = rows;
  s.Q = rows / static_cast<double>(V);
  s.word_marginal = Vector::Constant(V, 1.0 / static_cast<double>(V));
  s.degenerate.assign(static_cast<std::size_t>(V), false);
  return s;
}

/// Separable topic matrix: word k is the anchor of topic k (mass `anchor_mass`
/// there, zero in every other topic).
inline Matrix planted_separable(Eigen::Index V, Eigen::Index K, double anchor_mass, std::uint64_t seed) {
  Matrix A = random_stochastic(V, K, seed);
  for (Eigen::Index k = 0; k < K; ++k) {
    A.block(0, k, K, 1).setZero();
    A.col(k) *= (1.0 - anchor_mass) / A.col(k).sum();
    A(k, k) = anchor_mass;
  }
  return A;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() / ("itm-" + tag + "-" + std::to_string(rng()));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace itm::test
