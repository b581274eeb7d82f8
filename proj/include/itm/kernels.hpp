#pragma once

// Data-parallel inner loops of the pipeline. Every kernel has a serial
// reference in kernels::serial and an OpenMP version in kernels::parallel;
// both produce bit-identical results for any thread count (per-item RNG
// streams, no floating-point reductions across threads).

#include <cstdint>
#include <span>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/linalg.hpp"

namespace itm::kernels {

/// Sum over documents with n_d >= 2 of (h h^T - diag h) / (n_d (n_d - 1)).
struct PairSums {
  RowMatrix sums;
  std::size_t documents_used = 0;
};

struct SimplexSolveOptions {
  double step = 50.0;
  double tol = 1e-7;
  int max_iter = 500;
};

/// Per-word inputs of  min_c c^T G c - 2 b_i^T c + yy_i  over the simplex.
struct SimplexProblem {
  const Matrix* gram;          // T x T, X X^T
  const RowMatrix* linear;     // V x T, row i = X y_i
  const Vector* target_norm2;  // V, y_i^T y_i
  std::span<const int> fixed;  // V, -1 = solve, -2 = uniform (degenerate), k >= 0 = indicator e_k
};

struct SimplexSolution {
  RowMatrix weights;  // V x T
  Vector objective;   // final objective per word, clamped at 0
  std::vector<int> iterations;
  std::vector<bool> converged;
};

/// Exponentiated gradient for a single word, recording the objective after each
/// accepted step in `trace` when non-null.
void solve_simplex_word(const Matrix& gram, const Eigen::Ref<const Vector>& linear, double target_norm2,
                        const SimplexSolveOptions& opt, Eigen::Ref<Vector> weights, double* objective,
                        int* iterations, bool* converged, std::vector<double>* trace = nullptr);

struct GibbsResult {
  RowMatrix theta;                  // D x K, rows in the simplex
  std::vector<bool> empty;          // no token with positive probability under any topic
};

struct KnnOptions {
  int k = 10;
  bool euclidean = false;  // default total variation (l1 / 2)
};

namespace serial {
PairSums accumulate_pairs(const Corpus& corpus);
void project_out(RowMatrix& residuals, const Vector& unit_direction);
SimplexSolution solve_simplex(const SimplexProblem& problem, const SimplexSolveOptions& opt);
GibbsResult gibbs_fixed_topics(const Matrix& topics, const Corpus& corpus, std::span<const std::size_t> docs,
                               double alpha, int iterations, std::uint64_t seed);
std::vector<std::size_t> knn_predict(const RowMatrix& points, std::span<const std::size_t> labels,
                                     const KnnOptions& opt);
}  // namespace serial

namespace parallel {
PairSums accumulate_pairs(const Corpus& corpus);
void project_out(RowMatrix& residuals, const Vector& unit_direction);
SimplexSolution solve_simplex(const SimplexProblem& problem, const SimplexSolveOptions& opt);
GibbsResult gibbs_fixed_topics(const Matrix& topics, const Corpus& corpus, std::span<const std::size_t> docs,
                               double alpha, int iterations, std::uint64_t seed);
std::vector<std::size_t> knn_predict(const RowMatrix& points, std::span<const std::size_t> labels,
                                     const KnnOptions& opt);
}  // namespace parallel

namespace detail {
void gibbs_document(const Matrix& topics, const Document& doc, double alpha, int iterations, std::uint64_t seed,
                    Eigen::Ref<Vector> theta, bool* empty);
std::size_t knn_vote(const RowMatrix& points, std::span<const std::size_t> labels, std::size_t query,
                     const KnnOptions& opt);
}  // namespace detail

}  // namespace itm::kernels
