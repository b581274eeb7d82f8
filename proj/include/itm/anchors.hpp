#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "itm/cooccur.hpp"
#include "itm/linalg.hpp"

namespace itm {

struct AnchorOptions {
  std::size_t num_anchors = 500;    // T
  std::size_t candidate_filter = 100;  // minimum document frequency for eligibility
  std::optional<std::size_t> projection_dim;  // Gaussian random projection of Qbar rows
  std::uint64_t seed = 1;
};

/// Ordered candidate anchors s_1..s_T. residuals[t] is the distance of s_t to
/// the affine span of s_1..s_{t-1} (to the candidate centroid for t = 0).
struct AnchorSet {
  std::vector<WordId> indices;
  std::vector<double> residuals;
  std::optional<std::size_t> projection_dim;
  std::size_t candidate_filter = 0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return indices.size(); }
};

/// Greedy farthest-point selection over the eligible rows of Qbar.
/// `doc_freq` may be empty, in which case every non-degenerate word is eligible.
AnchorSet find_anchors(const CooccurrenceStats& stats, std::span<const std::size_t> doc_freq,
                       const AnchorOptions& options);

/// Euclidean distance from `row` to the affine hull of `basis`.
double distance_to_span(const Vector& row, std::span<const Vector> basis);

}  // namespace itm
