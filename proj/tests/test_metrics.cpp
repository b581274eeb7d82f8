#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"
#include "itm/error.hpp"
#include "itm/metrics.hpp"
#include "itm/subtopic_sim.hpp"

using namespace itm;

namespace {

TopicMatrix topics_of(Matrix A) { return TopicMatrix{std::move(A), {}}; }

// Coherence by recounting document sets directly.
double coherence_oracle(const std::vector<WordId>& top, const Corpus& c, double eps) {
  std::vector<std::set<WordId>> docs;
  for (const auto& d : c.documents()) {
    std::set<WordId> s;
    for (const auto& wc : d.counts) s.insert(wc.word);
    docs.push_back(s);
  }
  auto D = [&](WordId a) { return static_cast<double>(std::count_if(docs.begin(), docs.end(), [&](auto& s) { return s.count(a) > 0; })); };
  auto D2 = [&](WordId a, WordId b) {
    return static_cast<double>(std::count_if(docs.begin(), docs.end(), [&](auto& s) { return s.count(a) && s.count(b); }));
  };
  double score = 0;
  for (std::size_t i = 1; i < top.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) score += std::log((D2(top[i], top[j]) + eps) / D(top[j]));
  return score;
}

// LOOCV by brute force: stable sort by distance, majority vote, ties to the
// smaller summed distance, then the lower label.
double knn_oracle(const RowMatrix& P, const std::vector<std::size_t>& labels, int k, bool euclidean) {
  const auto n = static_cast<std::size_t>(P.rows());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto diff = P.row(static_cast<Eigen::Index>(i)) - P.row(static_cast<Eigen::Index>(j));
      d.push_back({euclidean ? diff.norm() : 0.5 * diff.cwiseAbs().sum(), j});
    }
    std::stable_sort(d.begin(), d.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::map<std::size_t, std::pair<int, double>> votes;
    for (int t = 0; t < k; ++t) {
      auto& v = votes[labels[d[static_cast<std::size_t>(t)].second]];
      ++v.first;
      v.second += d[static_cast<std::size_t>(t)].first;
    }
    std::size_t best = 0;
    std::pair<int, double> bv{-1, 0};
    for (auto& [label, v] : votes)
      if (v.first > bv.first || (v.first == bv.first && v.second < bv.second)) {
        best = label;
        bv = v;
      }
    correct += best == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

// E[(n_0 + alpha) / (N + 2 alpha)] under the collapsed posterior of a two-topic
// document with fixed topics. e[m] sums, over every way of giving m tokens to
// topic 0, the product of their word probabilities.
double exact_posterior_theta0(const Matrix& A, const std::vector<WordId>& doc, double alpha) {
  const auto N = doc.size();
  std::vector<double> e(N + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto w = static_cast<Eigen::Index>(doc[i]);
    for (std::size_t m = i + 1; m > 0; --m) e[m] = e[m] * A(w, 1) + e[m - 1] * A(w, 0);
    e[0] *= A(w, 1);
  }
  double z = 0, mean = 0;
  for (std::size_t m = 0; m <= N; ++m) {
    const double p = e[m] * std::exp(std::lgamma(m + alpha) + std::lgamma(static_cast<double>(N - m) + alpha));
    z += p;
    mean += p * (static_cast<double>(m) + alpha) / (static_cast<double>(N) + 2 * alpha);
  }
  return mean / z;
}

RowMatrix random_simplex_points(Eigen::Index n, Eigen::Index K, std::uint64_t seed) {
  return test::random_stochastic(K, n, seed).transpose();
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("top words order by probability, ties to the lower id") {
  Matrix A(5, 1);
  A << 0.1, 0.3, 0.1, 0.3, 0.2;
  CHECK(top_words(A, 0, 3) == std::vector<WordId>{1, 3, 4});
  CHECK(top_words(A, 0, 9) == std::vector<WordId>{1, 3, 4, 0, 2});
}

TEST_CASE("topic entropy") {
  Matrix A = Matrix::Zero(8, 3);
  A(5, 0) = 1.0;
  A.col(1).setConstant(1.0 / 8.0);
  A(0, 2) = A(1, 2) = 0.5;
  const auto h = topic_entropy(topics_of(A));
  CHECK(h.per_topic[0] == 0.0);
  CHECK(h.per_topic[1] == std::log(8.0));
  CHECK(h.per_topic[2] == std::log(2.0));
  CHECK(h.mean == doctest::Approx((std::log(8.0) + std::log(2.0)) / 3.0).epsilon(1e-15));
  // Uniform over a vocabulary that is not a power of two: equal up to rounding.
  CHECK(topic_entropy(topics_of(Matrix::Constant(7, 1, 1.0 / 7.0))).per_topic[0] == doctest::Approx(std::log(7.0)).epsilon(1e-15));
  const Matrix R = test::random_stochastic(40, 6, 1);
  for (double v : topic_entropy(topics_of(R)).per_topic) CHECK(v <= std::log(40.0));
}

TEST_CASE("unique top words") {
  Matrix same(6, 3);
  same.col(0) << 0.3, 0.25, 0.2, 0.1, 0.1, 0.05;
  same.col(1) = same.col(0);
  same.col(2) = same.col(0);
  CHECK(unique_top_words(topics_of(same), 3) == 0.0);
  CHECK(unique_top_words(topics_of(Matrix::Identity(4, 4)), 1) == 1.0);
  Matrix two(3, 2);
  two << 0.6, 0.0, 0.4, 0.5, 0.0, 0.5;  // top-2 lists {0, 1} and {1, 2}
  CHECK(unique_top_words(topics_of(two), 2) == 0.5);
  CHECK_THROWS_AS(unique_top_words(topics_of(two), 0), ValidationError);
}

TEST_CASE("coherence examples") {
  // Words 0 and 1 always appear together.
  const auto together = test::corpus_from_ids(3, {{0, 1}, {0, 1, 2}, {2}});
  Matrix A(3, 1);
  A << 0.5, 0.4, 0.1;
  CHECK(coherence(topics_of(A), together, 2, 1e-12).per_topic[0] == doctest::Approx(0.0).epsilon(1e-9));
  // Word 0 in ten documents, word 1 in five others.
  std::vector<std::vector<WordId>> docs(15);
  for (int d = 0; d < 10; ++d) docs[static_cast<std::size_t>(d)] = {0};
  for (int d = 10; d < 15; ++d) docs[static_cast<std::size_t>(d)] = {1};
  const auto apart = test::corpus_from_ids(3, docs);
  CHECK(coherence(topics_of(A), apart, 2, 1.0).per_topic[0] == doctest::Approx(std::log(0.1)).epsilon(1e-15));
  CHECK_THROWS_AS(coherence(topics_of(A), apart, 1, 1.0), ValidationError);
  // Top word absent from every document.
  Matrix B(3, 1);
  B << 0.1, 0.2, 0.7;
  CHECK_THROWS_AS(coherence(topics_of(B), apart, 2, 1.0), ValidationError);
}

TEST_CASE("coherence on a toy corpus matches a recount") {
  std::mt19937_64 rng(2);
  std::vector<std::vector<WordId>> docs;
  for (int d = 0; d < 40; ++d) {
    std::vector<WordId> w;
    for (int t = 0; t < 5; ++t) w.push_back(static_cast<WordId>(rng() % 12));
    docs.push_back(w);
  }
  const auto c = test::corpus_from_ids(12, docs);
  const auto topics = topics_of(test::random_stochastic(12, 3, 3));
  for (double eps : {1.0, 0.01}) {
    const auto s = coherence(topics, c, 4, eps);
    for (Eigen::Index k = 0; k < 3; ++k)
      CHECK(s.per_topic[static_cast<std::size_t>(k)] ==
            doctest::Approx(coherence_oracle(top_words(topics.A, k, 4), c, eps)).epsilon(1e-14));
    CHECK(s.mean == doctest::Approx((s.per_topic[0] + s.per_topic[1] + s.per_topic[2]) / 3.0));
  }
  // Larger epsilon never lowers the score.
  CHECK(coherence(topics, c, 4, 2.0).mean >= coherence(topics, c, 4, 1.0).mean);
}

TEST_CASE("fixed-topic Gibbs inference") {
  SUBCASE("one topic") {
    const auto c = test::corpus_from_ids(4, {{0, 1, 2}, {3}, {}});
    const auto dt = infer_doc_topics(topics_of(Matrix::Constant(4, 1, 0.25)), c, {});
    CHECK(dt.theta == RowMatrix::Ones(3, 1));
    CHECK(dt.flagged == std::vector<bool>{false, false, true});
  }
  SUBCASE("words supported by a single topic force the assignment") {
    Matrix A(4, 2);
    A << 0.5, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.5;
    const auto c = test::corpus_from_ids(4, {{2, 3, 3, 2, 2, 3, 2, 3, 3, 3}});
    const auto dt = infer_doc_topics(topics_of(A), c, {1e-4, 20, 1});
    CHECK(dt.theta(0, 1) >= 1.0 - 1e-4);
  }
  SUBCASE("pure documents are recovered for length 50") {
    const Matrix A = random_ideal_model(30, 2, 50.0, 0.8, 0.9, 4).M;
    std::vector<Document> docs;
    std::vector<std::vector<WordId>> ids;
    std::mt19937_64 rng(5);
    std::vector<std::size_t> truth;
    for (int d = 0; d < 60; ++d) {
      const auto k = static_cast<Eigen::Index>(d % 2);
      std::discrete_distribution<int> w(A.col(k).data(), A.col(k).data() + 30);
      std::vector<WordId> doc;
      for (int t = 0; t < 50; ++t) doc.push_back(static_cast<WordId>(w(rng)));
      ids.push_back(doc);
      truth.push_back(static_cast<std::size_t>(k));
    }
    const auto c = test::corpus_from_ids(30, ids);
    const auto dt = infer_doc_topics(topics_of(A), c, {});
    for (Eigen::Index d = 0; d < 60; ++d) {
      CHECK(dt.theta.row(d).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(dt.theta(d, static_cast<Eigen::Index>(truth[static_cast<std::size_t>(d)])) >= 0.9);
    }
  }
  SUBCASE("two overlapping topics match the exact posterior mean") {
    const Matrix A = test::random_stochastic(10, 2, 13);
    std::mt19937_64 rng(14);
    std::vector<std::vector<WordId>> ids;
    for (int d = 0; d < 4; ++d) {
      std::vector<WordId> doc;
      for (int t = 0; t < 12; ++t) doc.push_back(static_cast<WordId>(rng() % 10));
      ids.push_back(doc);
    }
    const auto c = test::corpus_from_ids(10, ids);
    const GibbsOptions opt{0.5, 4000, 15};
    const auto dt = infer_doc_topics(topics_of(A), c, opt);
    for (std::size_t d = 0; d < ids.size(); ++d)
      CHECK(std::abs(dt.theta(static_cast<Eigen::Index>(d), 0) - exact_posterior_theta0(A, ids[d], opt.alpha)) <= 0.02);
  }
  SUBCASE("selected documents and errors") {
    const auto c = test::corpus_from_ids(4, {{0}, {1}, {2}});
    const std::vector<std::size_t> pick = {2, 0};
    const auto dt = infer_doc_topics(topics_of(Matrix::Constant(4, 2, 0.25)), c, {}, pick);
    CHECK(dt.docs == pick);
    CHECK(dt.theta.rows() == 2);
    const std::vector<std::size_t> bad = {3};
    CHECK_THROWS_AS(infer_doc_topics(topics_of(Matrix::Constant(4, 2, 0.25)), c, {}, bad), ValidationError);
    CHECK_THROWS_AS(infer_doc_topics(topics_of(Matrix::Constant(4, 2, 0.25)), c, {0.1, 0, 1}), ValidationError);
    CHECK_THROWS_AS(infer_doc_topics(topics_of(Matrix::Constant(5, 2, 0.2)), c, {}), ValidationError);
  }
}

TEST_CASE("log-likelihood per token") {
  const Matrix A = test::random_stochastic(20, 3, 6);
  CorpusGenOptions g;
  g.num_docs = 200;
  g.doc_length = 30;
  const auto c = generate_corpus(A, Vector::Constant(3, 0.3), g);

  SUBCASE("uniform topics give -log V") {
    const auto r = loglik_per_token(topics_of(Matrix::Constant(20, 3, 1.0 / 20.0)), c);
    CHECK(std::abs(r.per_token + std::log(20.0)) <= 1e-9);
    CHECK(r.tokens == c.total_tokens());
  }
  SUBCASE("the unigram topic gives the unigram likelihood") {
    const auto f = c.word_frequency();
    const double N = static_cast<double>(c.total_tokens());
    Matrix U(20, 1);
    double ll = 0;
    for (Eigen::Index i = 0; i < 20; ++i) U(i, 0) = static_cast<double>(f[static_cast<std::size_t>(i)]) / N;
    for (Eigen::Index i = 0; i < 20; ++i)
      if (f[static_cast<std::size_t>(i)]) ll += static_cast<double>(f[static_cast<std::size_t>(i)]) * std::log(U(i, 0));
    CHECK(loglik_per_token(topics_of(U), c).per_token == doctest::Approx(ll / N).epsilon(1e-12));
  }
  SUBCASE("a duplicated column leaves the value unchanged") {
    Matrix D(20, 4);
    D << A, A.col(2);
    const double a = loglik_per_token(topics_of(A), c).per_token;
    const double b = loglik_per_token(topics_of(D), c).per_token;
    CHECK(std::abs(a - b) <= 1e-2);
  }
  SUBCASE("zero-probability tokens are floored and counted") {
    Matrix Z = Matrix::Zero(20, 1);
    Z.topRows(10).setConstant(0.1);
    const auto r = loglik_per_token(topics_of(Z), c);
    std::uint64_t outside = 0;
    for (std::size_t i = 10; i < 20; ++i) outside += c.word_frequency()[i];
    CHECK(r.floored_tokens == outside);
    CHECK(std::isfinite(r.per_token));
  }
}

TEST_CASE("k-NN LOOCV") {
  SUBCASE("hand-made five points") {
    // Points (x, 1 - x); total variation distance is |x - y|.
    const std::vector<double> xs = {0.0, 0.125, 0.25, 0.75, 0.875};
    const std::vector<std::size_t> labels = {0, 0, 1, 1, 0};
    RowMatrix P(5, 2);
    for (Eigen::Index i = 0; i < 5; ++i) P.row(i) << xs[static_cast<std::size_t>(i)], 1.0 - xs[static_cast<std::size_t>(i)];
    CHECK(knn_loocv(P, labels, 1) == 0.4);
    CHECK(knn_loocv(P, labels, 2) == 0.4);
    CHECK(knn_loocv(P, labels, 3) == 0.0);
    CHECK_THROWS_AS(knn_loocv(P, labels, 5), ValidationError);
    CHECK_THROWS_AS(knn_loocv(P, labels, 0), ValidationError);
    CHECK_THROWS_AS(knn_loocv(P.topRows(1), std::vector<std::size_t>{0}, 1), ValidationError);
  }
  SUBCASE("separated clusters") {
    RowMatrix P(20, 3);
    std::vector<std::size_t> labels;
    for (Eigen::Index i = 0; i < 20; ++i) {
      const bool a = i < 10;
      P.row(i) << (a ? 0.9 : 0.05), (a ? 0.05 : 0.9), 0.05;
      labels.push_back(a ? 0 : 1);
    }
    CHECK(knn_loocv(P, labels, 1) == 1.0);
    CHECK(knn_loocv(P, labels, 5, Distance::euclidean) == 1.0);
  }
  SUBCASE("matches the brute-force oracle") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const auto P = random_simplex_points(60, 4, seed);
      std::mt19937_64 rng(seed);
      std::vector<std::size_t> labels;
      for (int i = 0; i < 60; ++i) labels.push_back(rng() % 3);
      for (int k : {1, 2, 5, 10})
        for (bool e : {false, true})
          CHECK(knn_loocv(P, labels, k, e ? Distance::euclidean : Distance::total_variation) == knn_oracle(P, labels, k, e));
    }
  }
  SUBCASE("random labels score near chance") {
    const auto P = random_simplex_points(2000, 5, 7);
    std::mt19937_64 rng(8);
    std::vector<std::size_t> labels;
    for (int i = 0; i < 2000; ++i) labels.push_back(rng() & 1);
    const double acc = knn_loocv(P, labels, 10);
    CHECK(std::abs(acc - 0.5) <= 3.0 * std::sqrt(0.25 / 2000.0));
  }
  CHECK(parse_distance("tv") == Distance::total_variation);
  CHECK(parse_distance("euclidean") == Distance::euclidean);
  CHECK_THROWS_AS(parse_distance("cosine"), ValidationError);
}

TEST_CASE("word intrusion items") {
  std::vector<std::string> words;
  for (int i = 0; i < 30; ++i) words.push_back("v" + std::to_string(i));
  const Vocabulary vocab(words);

  SUBCASE("disjoint topics") {
    Matrix A = Matrix::Zero(30, 2);
    for (Eigen::Index i = 0; i < 15; ++i) {
      A(i, 0) = static_cast<double>(15 - i);
      A(15 + i, 1) = static_cast<double>(15 - i);
    }
    A.col(0) /= A.col(0).sum();
    A.col(1) /= A.col(1).sum();
    const auto s = make_intrusion_items(topics_of(A), vocab, 10, 3);
    REQUIRE(s.items.size() == 2);
    for (const auto& item : s.items) {
      CHECK(item.shown.size() == 11);
      CHECK(item.shown_words.size() == 11);
      CHECK(item.source_topic == 1 - item.topic_id);
      const auto intruder = item.shown[item.intruder_position];
      const auto own = top_words(A, static_cast<Eigen::Index>(item.topic_id), 10);
      const auto other = top_words(A, static_cast<Eigen::Index>(item.source_topic), 10);
      CHECK(std::find(own.begin(), own.end(), intruder) == own.end());
      CHECK(std::find(other.begin(), other.end(), intruder) != other.end());
      std::vector<WordId> rest = item.shown;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(item.intruder_position));
      std::sort(rest.begin(), rest.end());
      auto sorted_own = own;
      std::sort(sorted_own.begin(), sorted_own.end());
      CHECK(rest == sorted_own);
      for (std::size_t p = 0; p < 11; ++p) CHECK(item.shown_words[p] == vocab.word(item.shown[p]));
    }
    CHECK(make_intrusion_items(topics_of(A), vocab, 10, 3).items[0].shown == s.items[0].shown);
  }
  SUBCASE("identical topics have no intruder") {
    const Matrix A = test::random_stochastic(30, 1, 9);
    Matrix B(30, 3);
    B << A, A, A;
    const auto s = make_intrusion_items(topics_of(B), vocab, 5, 1);
    CHECK(s.items.empty());
    CHECK(s.warnings.size() == 3);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(make_intrusion_items(topics_of(Matrix::Constant(30, 1, 1.0 / 30)), vocab, 5, 1), ValidationError);
    CHECK_THROWS_AS(make_intrusion_items(topics_of(test::random_stochastic(30, 2, 1)), vocab, 1, 1), ValidationError);
    CHECK_THROWS_AS(make_intrusion_items(topics_of(test::random_stochastic(29, 2, 1)), vocab, 5, 1), ValidationError);
  }
}

TEST_CASE("evaluation report collects every metric") {
  const Matrix A = test::random_stochastic(20, 3, 10);
  CorpusGenOptions g;
  g.num_docs = 100;
  g.doc_length = 20;
  const auto c = generate_corpus(A, Vector::Constant(3, 0.3), g);
  const auto r = evaluate_model(topics_of(A), c, {});
  CHECK(r.loglik_per_token == loglik_per_token(topics_of(A), c).per_token);
  CHECK(r.coherence_mean == coherence(topics_of(A), c).mean);
  CHECK(r.pct_unique_top_words == unique_top_words(topics_of(A)));
  CHECK(r.avg_topic_entropy == topic_entropy(topics_of(A)).mean);
  CHECK(r.pct_unique_top_words >= 0.0);
  CHECK(r.pct_unique_top_words <= 1.0);
}

}  // TEST_SUITE
