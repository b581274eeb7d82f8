#include <omp.h>

#include "itm/kernels.hpp"
#include "itm/rng.hpp"

namespace itm::kernels::parallel {

// Row-gather formulation: each row of the pair sums is owned by one thread and
// accumulated over the documents containing that word, in document order, so
// the floating-point sequence per entry matches the serial scatter loop.
PairSums accumulate_pairs(const Corpus& corpus) {
  const auto V = corpus.vocab_size();
  const auto& docs = corpus.documents();

  std::vector<double> scale(docs.size(), 0.0);
  std::vector<std::size_t> postings_start(V + 1, 0);
  std::size_t used = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const double n = static_cast<double>(docs[d].length());
    if (n < 2) continue;
    scale[d] = 1.0 / (n * (n - 1.0));
    ++used;
    for (const auto& wc : docs[d].counts) ++postings_start[wc.word + 1];
  }
  for (std::size_t w = 0; w < V; ++w) postings_start[w + 1] += postings_start[w];
  struct Posting {
    std::uint32_t doc;
    std::uint32_t count;
  };
  std::vector<Posting> postings(postings_start[V]);
  {
    auto fill = postings_start;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (scale[d] == 0.0) continue;
      for (const auto& wc : docs[d].counts)
        postings[fill[wc.word]++] = {static_cast<std::uint32_t>(d), wc.count};
    }
  }

  PairSums out{RowMatrix::Zero(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(V)), used};
  const auto nv = static_cast<std::int64_t>(V);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t a = 0; a < nv; ++a) {
    auto row = out.sums.row(a);
    for (std::size_t p = postings_start[a]; p < postings_start[a + 1]; ++p) {
      const auto& post = postings[p];
      const double ha = post.count;
      const double sc = scale[post.doc];
      for (const auto& b : docs[post.doc].counts) {
        const double hb = b.count;
        const double pair = static_cast<std::int64_t>(b.word) == a ? ha * ha - ha : ha * hb;
        row[static_cast<Eigen::Index>(b.word)] += sc * pair;
      }
    }
  }
  return out;
}

void project_out(RowMatrix& residuals, const Vector& u) {
  const auto rows = static_cast<std::int64_t>(residuals.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const double coef = residuals.row(r).dot(u.transpose());
    residuals.row(r) -= coef * u.transpose();
  }
}

SimplexSolution solve_simplex(const SimplexProblem& p, const SimplexSolveOptions& opt) {
  const auto V = p.linear->rows();
  const auto T = p.gram->rows();
  SimplexSolution s{RowMatrix::Zero(V, T), Vector::Zero(V), std::vector<int>(V, 0), std::vector<bool>(V, true)};
  std::vector<char> conv(static_cast<std::size_t>(V), 1);
#pragma omp parallel
  {
    Vector c(T);
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index i = 0; i < V; ++i) {
      const int fixed = p.fixed[static_cast<std::size_t>(i)];
      if (fixed >= 0) {
        s.weights(i, fixed) = 1.0;
        continue;
      }
      if (fixed == -2) {
        s.weights.row(i).setConstant(1.0 / static_cast<double>(T));
        conv[static_cast<std::size_t>(i)] = 0;
        continue;
      }
      double obj = 0.0;
      int iters = 0;
      bool ok = false;
      solve_simplex_word(*p.gram, p.linear->row(i).transpose(), (*p.target_norm2)[i], opt, c, &obj, &iters, &ok);
      s.weights.row(i) = c.transpose();
      s.objective[i] = obj;
      s.iterations[static_cast<std::size_t>(i)] = iters;
      conv[static_cast<std::size_t>(i)] = ok;
    }
  }
  for (std::size_t i = 0; i < conv.size(); ++i) s.converged[i] = conv[i] != 0;
  return s;
}

GibbsResult gibbs_fixed_topics(const Matrix& topics, const Corpus& corpus, std::span<const std::size_t> docs,
                               double alpha, int iterations, std::uint64_t seed) {
  GibbsResult r{RowMatrix::Zero(static_cast<Eigen::Index>(docs.size()), topics.cols()),
                std::vector<bool>(docs.size(), false)};
  std::vector<char> empty(docs.size(), 0);
  const auto n = static_cast<std::int64_t>(docs.size());
#pragma omp parallel
  {
    Vector theta(topics.cols());
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
      bool e = false;
      const auto d = docs[static_cast<std::size_t>(i)];
      detail::gibbs_document(topics, corpus.documents()[d], alpha, iterations, derive_seed(seed, d), theta, &e);
      r.theta.row(i) = theta.transpose();
      empty[static_cast<std::size_t>(i)] = e;
    }
  }
  for (std::size_t i = 0; i < empty.size(); ++i) r.empty[i] = empty[i] != 0;
  return r;
}

std::vector<std::size_t> knn_predict(const RowMatrix& points, std::span<const std::size_t> labels,
                                     const KnnOptions& opt) {
  std::vector<std::size_t> pred(static_cast<std::size_t>(points.rows()));
  const auto n = static_cast<std::int64_t>(pred.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i)
    pred[static_cast<std::size_t>(i)] = detail::knn_vote(points, labels, static_cast<std::size_t>(i), opt);
  return pred;
}

}  // namespace itm::kernels::parallel
