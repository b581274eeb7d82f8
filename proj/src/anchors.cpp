#include "itm/anchors.hpp"

#include <cmath>
#include <random>

#include "itm/error.hpp"
#include "itm/kernels.hpp"
#include "itm/rng.hpp"

namespace itm {

namespace {

// Index of the row with the largest squared norm among rows not yet taken;
// ties resolve to the lowest row.
std::pair<Eigen::Index, double> farthest_row(const RowMatrix& rows, const std::vector<bool>& taken) {
  Eigen::Index best = -1;
  double best_norm2 = -1.0;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    if (taken[static_cast<std::size_t>(r)]) continue;
    const double n2 = rows.row(r).squaredNorm();
    if (n2 > best_norm2) {
      best_norm2 = n2;
      best = r;
    }
  }
  return {best, std::sqrt(std::max(0.0, best_norm2))};
}

}  // namespace

AnchorSet find_anchors(const CooccurrenceStats& stats, std::span<const std::size_t> doc_freq,
                       const AnchorOptions& options) {
  const auto V = stats.vocab_size();
  const auto T = options.num_anchors;
  if (T == 0) throw ValidationError("number of anchors must be positive");
  if (!doc_freq.empty() && doc_freq.size() != V) throw ValidationError("doc_freq length does not match vocabulary");
  if (options.projection_dim && (*options.projection_dim == 0 || *options.projection_dim > V))
    throw ValidationError("projection_dim must be in 1.." + std::to_string(V));

  std::vector<WordId> candidates;
  for (WordId w = 0; w < V; ++w) {
    if (stats.degenerate[w]) continue;
    if (!doc_freq.empty() && doc_freq[w] < options.candidate_filter) continue;
    candidates.push_back(w);
  }
  if (T > candidates.size())
    throw ValidationError("requested " + std::to_string(T) + " anchors but only " + std::to_string(candidates.size()) +
                          " words are eligible");

  const auto C = static_cast<Eigen::Index>(candidates.size());
  RowMatrix rows;
  // A projection onto all V dimensions is the identity map.
  if (options.projection_dim && *options.projection_dim < V) {
    const auto D = static_cast<Eigen::Index>(*options.projection_dim);
    Rng rng(derive_seed(options.seed, 0));
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(D)));
    RowMatrix P(static_cast<Eigen::Index>(V), D);
    for (Eigen::Index i = 0; i < P.rows(); ++i)
      for (Eigen::Index j = 0; j < D; ++j) P(i, j) = gauss(rng);
    rows.resize(C, D);
    for (Eigen::Index c = 0; c < C; ++c) rows.row(c) = stats.Qbar.row(static_cast<Eigen::Index>(candidates[c])) * P;
  } else {
    rows.resize(C, static_cast<Eigen::Index>(V));
    for (Eigen::Index c = 0; c < C; ++c) rows.row(c) = stats.Qbar.row(static_cast<Eigen::Index>(candidates[c]));
  }

  AnchorSet out;
  out.projection_dim = options.projection_dim;
  out.candidate_filter = doc_freq.empty() ? 0 : options.candidate_filter;
  out.seed = options.seed;
  std::vector<bool> taken(candidates.size(), false);

  // First anchor: farthest from the candidate centroid.
  const Eigen::RowVectorXd centroid = rows.colwise().mean();
  RowMatrix residual = rows.rowwise() - centroid;
  auto [first, first_dist] = farthest_row(residual, taken);
  taken[static_cast<std::size_t>(first)] = true;
  out.indices.push_back(candidates[static_cast<std::size_t>(first)]);
  out.residuals.push_back(first_dist);

  // Subsequent anchors: farthest from the affine span of those chosen, using
  // residuals translated by the first anchor and deflated by Gram-Schmidt.
  residual = rows.rowwise() - rows.row(first);
  const double scale = std::max(1.0, rows.cwiseAbs().maxCoeff());
  for (std::size_t t = 1; t < T; ++t) {
    auto [next, dist] = farthest_row(residual, taken);
    if (!(dist > 1e-12 * scale))
      throw ValidationError("anchor search found zero spread after " + std::to_string(t) +
                            " anchors (remaining rows lie in the span already chosen)");
    taken[static_cast<std::size_t>(next)] = true;
    out.indices.push_back(candidates[static_cast<std::size_t>(next)]);
    out.residuals.push_back(dist);
    const Vector direction = residual.row(next).transpose() / dist;
    kernels::parallel::project_out(residual, direction);
  }
  return out;
}

double distance_to_span(const Vector& row, std::span<const Vector> basis) {
  if (basis.empty()) throw ValidationError("distance_to_span needs a non-empty basis");
  const Vector& origin = basis.front();
  for (const auto& b : basis)
    if (b.size() != row.size()) throw ValidationError("basis vector dimension mismatch");
  std::vector<Vector> ortho;
  for (std::size_t j = 1; j < basis.size(); ++j) {
    Vector v = basis[j] - origin;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : ortho) v -= u.dot(v) * u;
    const double n = v.norm();
    if (n > 1e-14) ortho.push_back(v / n);
  }
  Vector r = row - origin;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& u : ortho) r -= u.dot(r) * u;
  return r.norm();
}

}  // namespace itm
