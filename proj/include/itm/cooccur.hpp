#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/linalg.hpp"

namespace itm {

/// Word co-occurrence statistics. Dense V x V storage: memory is
/// 2 * 8 * V^2 bytes (about 4.6 GB at V = 17000), which bounds intended scale.
struct CooccurrenceStats {
  RowMatrix Q;              // joint Pr(w1 = i, w2 = j)
  RowMatrix Qbar;           // Pr(w2 = j | w1 = i)
  Vector word_marginal;     // Pr(w = i) = row sums of Q
  std::vector<bool> degenerate;  // zero-marginal rows; Qbar row set to uniform
  std::size_t documents_used = 0;
  std::size_t documents_skipped = 0;  // n_d < 2

  std::size_t vocab_size() const noexcept { return static_cast<std::size_t>(Q.rows()); }
};

/// Averages, uniformly over documents with n_d >= 2, the unbiased pair estimator
/// (h h^T - diag(h)) / (n_d (n_d - 1)).
CooccurrenceStats build_cooccurrence(const Corpus& corpus);

/// Q = A R A^T for a column-stochastic A and a symmetric, nonnegative,
/// unit-mass R.
CooccurrenceStats analytic_cooccurrence(const Matrix& A, const Matrix& R);

/// Fills Qbar / marginal / degenerate flags from Q.
CooccurrenceStats finalize_cooccurrence(RowMatrix Q);

// Binary cache: 8-byte magic, uint64 V, then V*V little-endian float64 row-major.
inline constexpr char kQCacheMagic[8] = {'I', 'T', 'M', 'Q', 'v', '1', '\0', '\0'};

void write_q_cache(const RowMatrix& Q, const std::filesystem::path& path);
RowMatrix read_q_cache(const std::filesystem::path& path);

/// Loads Q from `<cache_dir>/<hash>.qbin` when present, else builds and stores it.
CooccurrenceStats cached_cooccurrence(const Corpus& corpus, const std::filesystem::path& cache_dir);

}  // namespace itm
