#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "itm/error.hpp"
#include "itm/experiment.hpp"

using namespace itm;

namespace {

SimulationConfig small_simulation() {
  SimulationConfig c;
  c.vocab_size = 150;
  c.num_topics = 3;
  c.core_weight = 0.6;
  c.subtopics.group_sizes = {3, 3, 3};
  c.subtopics.concentration = 10.0;
  c.subtopics.plant_anchors = true;
  c.generation.num_docs = 900;
  c.generation.doc_length = 20;
  return c;
}

ExperimentConfig small_experiment() {
  ExperimentConfig e;
  e.anchors.num_anchors = 30;
  e.anchors.candidate_filter = 5;
  e.oracle.per_category_count = 3;
  e.gibbs.iterations = 20;
  e.ks = {5, 10};
  e.sample_size = 300;
  return e;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("document samples") {
  const auto s = sample_documents(1000, 50, 3);
  CHECK(s.size() == 50);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  CHECK(s.back() < 1000);
  CHECK(sample_documents(1000, 50, 3) == s);
  CHECK(sample_documents(1000, 50, 4) != s);
  CHECK(sample_documents(7, 50, 3) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
  CHECK(sample_documents(0, 5, 1).empty());

  // Every document is equally likely to be drawn.
  std::vector<int> hits(20, 0);
  const int trials = 4000;
  for (int t = 0; t < trials; ++t)
    for (auto d : sample_documents(20, 5, static_cast<std::uint64_t>(t))) ++hits[d];
  const double expected = trials * 5.0 / 20.0;
  const double sd = std::sqrt(trials * 0.25 * 0.75);
  for (int h : hits) CHECK(std::abs(h - expected) < 4 * sd);
}

TEST_CASE("simulation is a function of its config") {
  const auto c = small_simulation();
  const auto a = simulate(c);
  const auto b = simulate(c);
  CHECK(a.corpus.documents() == b.corpus.documents());
  CHECK(a.model.A == b.model.A);
  CHECK(a.corpus.num_documents() == 900);
  CHECK(a.corpus.labeled());
  CHECK(a.corpus.label_names().size() == 3);
  auto d = c;
  d.generation.seed += 1;
  CHECK(simulate(d).corpus.documents() != a.corpus.documents());
  CHECK(simulate(d).model.A == a.model.A);
}

TEST_CASE("k-NN experiment on a small corpus") {
  const auto sim = simulate(small_simulation());
  const auto cfg = small_experiment();
  const auto r = run_knn_experiment(sim.corpus, cfg);
  REQUIRE(r.rows.size() == 5);
  const std::vector<std::string> names = {"full", "partial", "all", "select", "vanilla"};
  std::size_t selected = 0;
  for (const auto& g : r.oracle.feedback.groups) selected += g.size();
  const auto K = r.oracle.feedback.groups.size();
  CHECK(K == 3);
  const std::vector<std::size_t> sizes = {K, K, 30, selected, K};
  for (std::size_t i = 0; i < 5; ++i) {
    CAPTURE(i);
    CHECK(r.rows[i].name == names[i]);
    CHECK(r.rows[i].num_topics == sizes[i]);
    REQUIRE(r.rows[i].accuracy.size() == 2);
    for (double a : r.rows[i].accuracy) CHECK((a >= 0.0 && a <= 1.0));
  }
  CHECK(r.sample.size() == 300);
  // Label-informed topics beat chance comfortably.
  CHECK(r.rows[0].accuracy[1] > 0.6);

  const auto again = run_knn_experiment(sim.corpus, cfg);
  for (std::size_t i = 0; i < 5; ++i) CHECK(again.rows[i].accuracy == r.rows[i].accuracy);

  const auto table = format_experiment_table(r, cfg);
  std::istringstream lines(table);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  REQUIRE(all.size() == 6);
  CHECK(all[0].rfind("Model", 0) == 0);
  CHECK(all[0].find("k = 10") != std::string::npos);
  CHECK(all[3].rfind("all 30", 0) == 0);
  for (std::size_t i = 1; i < 6; ++i) CHECK(all[i].size() == all[1].size());

  const Json j = experiment_to_json(r, cfg, sim.corpus.vocabulary());
  CHECK(j["table"].size() == 5);
  CHECK(j["table"][0]["accuracy"]["k=5"] == r.rows[0].accuracy[0]);
  CHECK(j["sample_size"] == 300);
  CHECK(j["distance"] == "total_variation");
}

TEST_CASE("experiment input errors") {
  const Corpus unlabeled = test::corpus_from_ids(4, {{0, 1, 2}, {1, 2, 3}}, {}, 0);
  CHECK_THROWS_AS(run_knn_experiment(unlabeled, small_experiment()), ValidationError);
}

}  // TEST_SUITE
