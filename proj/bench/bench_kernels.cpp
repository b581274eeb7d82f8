// Serial reference kernels against their OpenMP counterparts on synthetic data.
// Each benchmark takes the implementation as its first argument: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "itm/kernels.hpp"
#include "itm/subtopic_sim.hpp"

using namespace itm;
namespace k = itm::kernels;

namespace {

Matrix random_topics(Eigen::Index V, Eigen::Index K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Matrix A(V, K);
  for (Eigen::Index t = 0; t < K; ++t) {
    for (Eigen::Index i = 0; i < V; ++i) A(i, t) = u(rng);
    A.col(t) /= A.col(t).sum();
  }
  return A;
}

const Corpus& corpus() {
  static const Corpus c = [] {
    CorpusGenOptions g;
    g.num_docs = 4000;
    g.doc_length = 60;
    g.poisson_length = true;
    g.seed = 3;
    return generate_corpus(random_topics(2000, 20, 1), Vector::Constant(20, 0.1), g);
  }();
  return c;
}

bool parallel(const benchmark::State& s) { return s.range(0) == 1; }

void BM_AccumulatePairs(benchmark::State& s) {
  const auto& c = corpus();
  for (auto _ : s)
    benchmark::DoNotOptimize(parallel(s) ? k::parallel::accumulate_pairs(c) : k::serial::accumulate_pairs(c));
}

void BM_ProjectOut(benchmark::State& s) {
  const RowMatrix R = random_topics(2000, 2000, 2);
  Vector u = Vector::Ones(2000).normalized();
  for (auto _ : s) {
    s.PauseTiming();
    RowMatrix r = R;
    s.ResumeTiming();
    parallel(s) ? k::parallel::project_out(r, u) : k::serial::project_out(r, u);
    benchmark::DoNotOptimize(r.data());
  }
}

void BM_SolveSimplex(benchmark::State& s) {
  const RowMatrix Y = random_topics(500, 1000, 4).transpose();
  Matrix X(30, 500);
  for (Eigen::Index t = 0; t < 30; ++t) X.row(t) = Y.row(t * 31);
  const Matrix G = X * X.transpose();
  const RowMatrix L = Y * X.transpose();
  const Vector yy = Y.rowwise().squaredNorm();
  std::vector<int> fixed(1000, -1);
  for (int t = 0; t < 30; ++t) fixed[static_cast<std::size_t>(t) * 31] = t;
  const k::SimplexProblem p{&G, &L, &yy, fixed};
  for (auto _ : s)
    benchmark::DoNotOptimize(parallel(s) ? k::parallel::solve_simplex(p, {}) : k::serial::solve_simplex(p, {}));
}

void BM_Gibbs(benchmark::State& s) {
  const auto& c = corpus();
  const Matrix A = random_topics(2000, 20, 5);
  std::vector<std::size_t> docs(500);
  for (std::size_t d = 0; d < docs.size(); ++d) docs[d] = d;
  for (auto _ : s)
    benchmark::DoNotOptimize(parallel(s) ? k::parallel::gibbs_fixed_topics(A, c, docs, 0.1, 50, 7)
                                         : k::serial::gibbs_fixed_topics(A, c, docs, 0.1, 50, 7));
}

void BM_Knn(benchmark::State& s) {
  const RowMatrix P = random_topics(20, 2000, 6).transpose();
  std::mt19937_64 rng(8);
  std::vector<std::size_t> labels(2000);
  for (auto& l : labels) l = rng() % 10;
  const k::KnnOptions o{50, false};
  for (auto _ : s)
    benchmark::DoNotOptimize(parallel(s) ? k::parallel::knn_predict(P, labels, o)
                                         : k::serial::knn_predict(P, labels, o));
}

}  // namespace

BENCHMARK(BM_AccumulatePairs)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectOut)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveSimplex)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gibbs)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Knn)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
