#include "itm/recovery.hpp"

#include <cmath>
#include <set>

#include "itm/error.hpp"

namespace itm {

void validate_topic_matrix(const Matrix& A, double tol) {
  if (A.cols() == 0) throw ValidationError("topic matrix has no topics");
  if ((A.array() < 0.0).any()) throw ValidationError("topic matrix has negative entries");
  for (Eigen::Index k = 0; k < A.cols(); ++k)
    if (std::abs(A.col(k).sum() - 1.0) > tol)
      throw ValidationError("topic " + std::to_string(k) + " does not sum to 1");
}

void validate_feedback(const GroupingFeedback& feedback, std::size_t num_anchors) {
  if (feedback.groups.empty()) throw ValidationError("feedback has no groups");
  if (!feedback.names.empty() && feedback.names.size() != feedback.groups.size())
    throw ValidationError("feedback names do not match groups");
  std::set<std::size_t> seen;
  for (std::size_t g = 0; g < feedback.groups.size(); ++g) {
    if (feedback.groups[g].empty()) throw ValidationError("group " + std::to_string(g) + " is empty");
    for (auto pos : feedback.groups[g]) {
      if (pos >= num_anchors)
        throw ValidationError("group " + std::to_string(g) + " references anchor position " + std::to_string(pos) +
                              " of " + std::to_string(num_anchors));
      if (!seen.insert(pos).second)
        throw ValidationError("anchor position " + std::to_string(pos) + " appears in more than one group");
    }
  }
}

ConvexWeights solve_convex_weights(const CooccurrenceStats& stats, const AnchorSet& anchors,
                                   const SolverOptions& options) {
  const auto V = static_cast<Eigen::Index>(stats.vocab_size());
  const auto T = static_cast<Eigen::Index>(anchors.size());
  if (T == 0) throw ValidationError("no anchors");
  if (options.max_iter < 0 || !(options.step > 0.0)) throw ValidationError("invalid solver options");

  std::vector<int> fixed(static_cast<std::size_t>(V), -1);
  for (std::size_t w = 0; w < stats.degenerate.size(); ++w)
    if (stats.degenerate[w]) fixed[w] = -2;
  RowMatrix X(T, V);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto w = anchors.indices[static_cast<std::size_t>(t)];
    if (w >= stats.vocab_size()) throw ValidationError("anchor word " + std::to_string(w) + " outside vocabulary");
    if (stats.degenerate[w]) throw ValidationError("anchor word " + std::to_string(w) + " has a degenerate row");
    if (fixed[w] >= 0) throw ValidationError("anchor word " + std::to_string(w) + " listed twice");
    fixed[w] = static_cast<int>(t);
    X.row(t) = stats.Qbar.row(static_cast<Eigen::Index>(w));
  }

  const Matrix gram = X * X.transpose();
  const RowMatrix linear = stats.Qbar * X.transpose();
  const Vector norm2 = stats.Qbar.rowwise().squaredNorm();
  kernels::SimplexProblem problem{&gram, &linear, &norm2, fixed};
  auto sol = kernels::parallel::solve_simplex(problem, options);
  return ConvexWeights{std::move(sol.weights), std::move(sol.objective), std::move(sol.converged),
                       std::move(sol.iterations)};
}

TopicMatrix recover_topic_matrix(const ConvexWeights& weights, const Vector& word_marginal) {
  if (weights.C.rows() != word_marginal.size())
    throw ValidationError("weights have " + std::to_string(weights.C.rows()) + " rows but marginal has " +
                          std::to_string(word_marginal.size()) + " entries");
  Matrix A = weights.C.array().colwise() * word_marginal.array();
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    const double mass = A.col(k).sum();
    if (!(mass > 0.0)) throw ValidationError("topic " + std::to_string(k) + " receives zero mass");
    A.col(k) /= mass;
  }
  return TopicMatrix{std::move(A), {}};
}

TopicMatrix recover_topics(const CooccurrenceStats& stats, const AnchorSet& anchors, const SolverOptions& options) {
  return recover_topic_matrix(solve_convex_weights(stats, anchors, options), stats.word_marginal);
}

AnchorSet select_anchors(const AnchorSet& anchors, const std::vector<std::size_t>& positions) {
  AnchorSet out;
  out.projection_dim = anchors.projection_dim;
  out.candidate_filter = anchors.candidate_filter;
  out.seed = anchors.seed;
  for (auto p : positions) {
    if (p >= anchors.size()) throw ValidationError("anchor position " + std::to_string(p) + " out of range");
    out.indices.push_back(anchors.indices[p]);
    out.residuals.push_back(p < anchors.residuals.size() ? anchors.residuals[p] : 0.0);
  }
  return out;
}

namespace {

// Column k of the result is the mean of per-anchor topics listed in groups[k],
// where `column_of` maps an anchor position to its column in `per_anchor`.
template <typename ColumnOf>
TopicMatrix average_groups(const Matrix& per_anchor, const GroupingFeedback& feedback, ColumnOf column_of) {
  TopicMatrix out{Matrix::Zero(per_anchor.rows(), static_cast<Eigen::Index>(feedback.groups.size())),
                  feedback.names};
  for (std::size_t k = 0; k < feedback.groups.size(); ++k) {
    const auto& group = feedback.groups[k];
    for (auto pos : group) out.A.col(static_cast<Eigen::Index>(k)) += per_anchor.col(column_of(pos));
    out.A.col(static_cast<Eigen::Index>(k)) /= static_cast<double>(group.size());
  }
  return out;
}

}  // namespace

TopicMatrix full_interactive_recovery(const CooccurrenceStats& stats, const AnchorSet& anchors,
                                      const GroupingFeedback& feedback, const SolverOptions& options) {
  validate_feedback(feedback, anchors.size());
  const auto per_anchor = recover_topics(stats, anchors, options);
  return average_groups(per_anchor.A, feedback, [](std::size_t pos) { return static_cast<Eigen::Index>(pos); });
}

TopicMatrix partial_interactive_recovery(const CooccurrenceStats& stats, const AnchorSet& anchors,
                                         const GroupingFeedback& feedback, const SolverOptions& options) {
  validate_feedback(feedback, anchors.size());
  std::vector<std::size_t> selected;
  std::vector<Eigen::Index> column(anchors.size(), -1);
  for (const auto& group : feedback.groups)
    for (auto pos : group) {
      column[pos] = static_cast<Eigen::Index>(selected.size());
      selected.push_back(pos);
    }
  const auto per_anchor = recover_topics(stats, select_anchors(anchors, selected), options);
  return average_groups(per_anchor.A, feedback, [&](std::size_t pos) { return column[pos]; });
}

}  // namespace itm
