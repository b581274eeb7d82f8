#include "itm/kernels.hpp"
#include "itm/rng.hpp"

// Straightforward reference loops, kept for equivalence tests and benchmarks.

namespace itm::kernels::serial {

PairSums accumulate_pairs(const Corpus& corpus) {
  const auto V = static_cast<Eigen::Index>(corpus.vocab_size());
  PairSums out{RowMatrix::Zero(V, V), 0};
  for (const auto& doc : corpus.documents()) {
    const double n = static_cast<double>(doc.length());
    if (n < 2) continue;
    const double scale = 1.0 / (n * (n - 1.0));
    for (const auto& a : doc.counts) {
      const double ha = a.count;
      for (const auto& b : doc.counts) {
        const double hb = b.count;
        const double pair = a.word == b.word ? ha * ha - ha : ha * hb;
        out.sums(static_cast<Eigen::Index>(a.word), static_cast<Eigen::Index>(b.word)) += scale * pair;
      }
    }
    ++out.documents_used;
  }
  return out;
}

void project_out(RowMatrix& residuals, const Vector& u) {
  for (Eigen::Index r = 0; r < residuals.rows(); ++r) {
    const double coef = residuals.row(r).dot(u.transpose());
    residuals.row(r) -= coef * u.transpose();
  }
}

SimplexSolution solve_simplex(const SimplexProblem& p, const SimplexSolveOptions& opt) {
  const auto V = p.linear->rows();
  const auto T = p.gram->rows();
  SimplexSolution s{RowMatrix::Zero(V, T), Vector::Zero(V), std::vector<int>(V, 0), std::vector<bool>(V, true)};
  Vector c(T);
  for (Eigen::Index i = 0; i < V; ++i) {
    const int fixed = p.fixed[static_cast<std::size_t>(i)];
    if (fixed >= 0) {
      s.weights(i, fixed) = 1.0;
      continue;
    }
    if (fixed == -2) {
      s.weights.row(i).setConstant(1.0 / static_cast<double>(T));
      s.converged[i] = false;
      continue;
    }
    double obj = 0.0;
    int iters = 0;
    bool conv = false;
    solve_simplex_word(*p.gram, p.linear->row(i).transpose(), (*p.target_norm2)[i], opt, c, &obj, &iters, &conv);
    s.weights.row(i) = c.transpose();
    s.objective[i] = obj;
    s.iterations[i] = iters;
    s.converged[i] = conv;
  }
  return s;
}

GibbsResult gibbs_fixed_topics(const Matrix& topics, const Corpus& corpus, std::span<const std::size_t> docs,
                               double alpha, int iterations, std::uint64_t seed) {
  GibbsResult r{RowMatrix::Zero(static_cast<Eigen::Index>(docs.size()), topics.cols()),
                std::vector<bool>(docs.size(), false)};
  Vector theta(topics.cols());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    bool empty = false;
    detail::gibbs_document(topics, corpus.documents()[docs[i]], alpha, iterations, derive_seed(seed, docs[i]),
                           theta, &empty);
    r.theta.row(static_cast<Eigen::Index>(i)) = theta.transpose();
    r.empty[i] = empty;
  }
  return r;
}

std::vector<std::size_t> knn_predict(const RowMatrix& points, std::span<const std::size_t> labels,
                                     const KnnOptions& opt) {
  std::vector<std::size_t> pred(static_cast<std::size_t>(points.rows()));
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = detail::knn_vote(points, labels, i, opt);
  return pred;
}

}  // namespace itm::kernels::serial
