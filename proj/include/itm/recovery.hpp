#pragma once

#include <optional>
#include <string>
#include <vector>

#include "itm/anchors.hpp"
#include "itm/cooccur.hpp"
#include "itm/kernels.hpp"
#include "itm/linalg.hpp"

namespace itm {

/// Rows of C are points of the T-simplex; C(i, k) estimates Pr(topic k | word i).
struct ConvexWeights {
  RowMatrix C;
  Vector residual;              // squared reconstruction error per word
  std::vector<bool> converged;  // false for degenerate words and iteration-capped solves
  std::vector<int> iterations;
};

/// V x K matrix whose columns are distributions over the vocabulary.
struct TopicMatrix {
  Matrix A;
  std::vector<std::string> topic_names;

  Eigen::Index num_words() const noexcept { return A.rows(); }
  Eigen::Index num_topics() const noexcept { return A.cols(); }
};

/// Checks the column-stochastic invariant (entries >= 0, columns sum to 1 within `tol`).
void validate_topic_matrix(const Matrix& A, double tol = 1e-6);

/// K disjoint, non-empty groups of positions into a candidate anchor list.
struct GroupingFeedback {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::string> names;  // empty or one per group

  std::size_t num_groups() const noexcept { return groups.size(); }
  bool operator==(const GroupingFeedback&) const = default;
};

/// Throws ValidationError unless groups are non-empty, disjoint and every
/// position is below `num_anchors`.
void validate_feedback(const GroupingFeedback& feedback, std::size_t num_anchors);

using SolverOptions = kernels::SimplexSolveOptions;

/// Expresses every Qbar row as a convex combination of the anchor rows by
/// exponentiated gradient. Anchor words get their own indicator exactly;
/// degenerate words get uniform weights and converged = false.
ConvexWeights solve_convex_weights(const CooccurrenceStats& stats, const AnchorSet& anchors,
                                   const SolverOptions& options = {});

/// Bayes step: A(i, k) = C(i, k) p_i / sum_j C(j, k) p_j.
TopicMatrix recover_topic_matrix(const ConvexWeights& weights, const Vector& word_marginal);

/// One topic per anchor, recovered with all anchors.
TopicMatrix recover_topics(const CooccurrenceStats& stats, const AnchorSet& anchors,
                           const SolverOptions& options = {});

/// Weights from all T anchors; returns the unweighted mean of the recovered
/// anchor topics within each group. Ungrouped anchors only shape the weights.
TopicMatrix full_interactive_recovery(const CooccurrenceStats& stats, const AnchorSet& anchors,
                                      const GroupingFeedback& feedback, const SolverOptions& options = {});

/// Like full recovery but the weights are re-solved against only the anchors
/// the user grouped.
TopicMatrix partial_interactive_recovery(const CooccurrenceStats& stats, const AnchorSet& anchors,
                                         const GroupingFeedback& feedback, const SolverOptions& options = {});

/// Anchor set restricted to `positions` (in that order).
AnchorSet select_anchors(const AnchorSet& anchors, const std::vector<std::size_t>& positions);

}  // namespace itm
