#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "itm/kernels.hpp"
#include "itm/rng.hpp"

namespace itm::kernels {

constexpr double kMaxStepGrowth = 1e12;

void solve_simplex_word(const Matrix& gram, const Eigen::Ref<const Vector>& linear, double target_norm2,
                        const SimplexSolveOptions& opt, Eigen::Ref<Vector> c, double* objective, int* iterations,
                        bool* converged, std::vector<double>* trace) {
  const auto T = gram.rows();
  c.setConstant(1.0 / static_cast<double>(T));
  Vector gc = gram * c;
  auto value = [&](const Vector& w, const Vector& gw) { return w.dot(gw) - 2.0 * linear.dot(w) + target_norm2; };
  double f = value(c, gc);
  if (trace) trace->push_back(f);

  Vector candidate(T), d(T), gd(T);
  bool done = false;
  int it = 0;
  // Each iteration takes the multiplicative point for the current step, then
  // moves to the exact minimizer of the quadratic on the segment towards it.
  // The step doubles when the full segment is accepted and halves when less
  // than half of it is.
  double step = opt.step;
  for (; it < opt.max_iter; ++it) {
    const Vector grad = 2.0 * (gc - linear);
    const double gmin = grad.minCoeff();
    // Frank-Wolfe duality gap: upper bound on the objective improvement still available.
    const double gap = grad.dot(c) - gmin;
    if (gap < opt.tol) {
      done = true;
      break;
    }
    bool moved = false;
    for (int tries = 0; tries < 60 && !moved; ++tries, step *= 0.5) {
      for (Eigen::Index k = 0; k < T; ++k) candidate[k] = c[k] * std::exp(-step * (grad[k] - gmin));
      const double s = candidate.sum();
      if (!(s > 0.0) || !std::isfinite(s)) continue;
      candidate /= s;
      d = candidate - c;
      gd.noalias() = gram * d;
      const double slope = grad.dot(d);
      const double curv = d.dot(gd);
      if (!(slope < 0.0)) continue;
      const double tau = curv > 0.0 ? std::min(1.0, -slope / (2.0 * curv)) : 1.0;
      const Vector next = c + tau * d;
      const Vector gnext = gc + tau * gd;
      const double fn = value(next, gnext);
      if (!(fn <= f)) continue;
      c = next;
      gc = gnext;
      f = fn;
      moved = true;
      if (tau >= 1.0) step = std::min(4.0 * step, 2.0 * kMaxStepGrowth * opt.step);  // doubled net of the loop's halving
      else if (tau >= 0.5) step *= 2.0;
    }
    if (trace && moved) trace->push_back(f);
    if (!moved) {
      // No descent along the multiplicative direction: at a numerical optimum.
      done = true;
      break;
    }
  }
  *objective = std::max(0.0, f);
  *iterations = it;
  *converged = done;
}

namespace detail {

void gibbs_document(const Matrix& topics, const Document& doc, double alpha, int iterations, std::uint64_t seed,
                    Eigen::Ref<Vector> theta, bool* empty) {
  const auto K = topics.cols();
  std::vector<Eigen::Index> tokens;
  for (const auto& wc : doc.counts) {
    if (topics.row(static_cast<Eigen::Index>(wc.word)).sum() <= 0.0) continue;
    tokens.insert(tokens.end(), wc.count, static_cast<Eigen::Index>(wc.word));
  }
  if (tokens.empty()) {
    theta.setConstant(1.0 / static_cast<double>(K));
    *empty = true;
    return;
  }
  *empty = false;

  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> cdf(static_cast<std::size_t>(K));
  auto draw = [&](auto&& weight) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) cdf[k] = acc += weight(k);
    const double u = unif(rng) * acc;
    const auto pos = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    return std::min<Eigen::Index>(pos, K - 1);
  };

  std::vector<Eigen::Index> z(tokens.size());
  Vector counts = Vector::Zero(K);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto w = tokens[i];
    z[i] = draw([&](Eigen::Index k) { return topics(w, k); });
    counts[z[i]] += 1.0;
  }

  const int burn_in = iterations / 2;
  const double denom = static_cast<double>(tokens.size()) + static_cast<double>(K) * alpha;
  theta.setZero();
  int samples = 0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto w = tokens[i];
      counts[z[i]] -= 1.0;
      z[i] = draw([&](Eigen::Index k) { return (counts[k] + alpha) * topics(w, k); });
      counts[z[i]] += 1.0;
    }
    if (it >= burn_in) {
      theta += (counts.array() + alpha).matrix() / denom;
      ++samples;
    }
  }
  theta /= static_cast<double>(samples);
  theta /= theta.sum();
}

std::size_t knn_vote(const RowMatrix& points, std::span<const std::size_t> labels, std::size_t query,
                     const KnnOptions& opt) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == query) continue;
    const auto diff = points.row(static_cast<Eigen::Index>(j)) - points.row(static_cast<Eigen::Index>(query));
    const double d = opt.euclidean ? diff.norm() : 0.5 * diff.cwiseAbs().sum();
    dist.emplace_back(d, j);
  }
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(opt.k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  // Votes keyed by label; ties broken by smaller total distance, then lower label.
  std::vector<std::pair<std::size_t, std::pair<std::size_t, double>>> votes;
  for (std::size_t r = 0; r < k; ++r) {
    const auto label = labels[dist[r].second];
    auto it = std::find_if(votes.begin(), votes.end(), [&](const auto& v) { return v.first == label; });
    if (it == votes.end()) {
      votes.push_back({label, {1, dist[r].first}});
    } else {
      ++it->second.first;
      it->second.second += dist[r].first;
    }
  }
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it) {
    const auto& [cnt, total] = it->second;
    const auto& [bcnt, btotal] = best->second;
    if (cnt > bcnt || (cnt == bcnt && (total < btotal || (total == btotal && it->first < best->first)))) best = it;
  }
  return best->first;
}

}  // namespace detail
}  // namespace itm::kernels
