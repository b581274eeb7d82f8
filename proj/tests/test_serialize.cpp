#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "itm/error.hpp"
#include "itm/experiment.hpp"
#include "itm/serialize.hpp"

using namespace itm;

namespace {

Vocabulary vocab_of(std::size_t V) {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < V; ++i) w.push_back("t" + std::to_string(i));
  return Vocabulary(w);
}

}  // namespace

TEST_SUITE("serialize") {

TEST_CASE("matrices survive a JSON round trip exactly") {
  const Matrix m = test::random_stochastic(7, 3, 1);
  const Json j = Json::parse(matrix_to_json(m).dump());
  CHECK(matrix_from_json(j) == m);
  CHECK(matrix_from_json(Json::array()).size() == 0);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, 2], [3]]")), ParseError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("{\"a\": 1}")), ParseError);
}

TEST_CASE("anchor sets") {
  AnchorSet a;
  a.indices = {4, 0, 2};
  a.residuals = {0.5, 0.25, 1e-9};
  a.projection_dim = 3;
  a.candidate_filter = 7;
  a.seed = 11;
  const Json j = anchors_to_json(a, vocab_of(5));
  CHECK(j["words"] == Json::array({"t4", "t0", "t2"}));
  const auto b = anchors_from_json(Json::parse(j.dump()));
  CHECK(b.indices == a.indices);
  CHECK(b.residuals == a.residuals);
  CHECK(b.projection_dim == a.projection_dim);
  CHECK(b.candidate_filter == 7);
  CHECK(b.seed == 11);
  a.projection_dim.reset();
  CHECK(!anchors_from_json(anchors_to_json(a, vocab_of(5))).projection_dim);
  CHECK_THROWS_AS(anchors_from_json(Json::parse("{\"indices\": \"x\"}")), ParseError);
}

TEST_CASE("grouping feedback") {
  const GroupingFeedback f{{{2, 0}, {1}}, {"a", "b"}};
  CHECK(feedback_from_json(Json::parse(feedback_to_json(f).dump())) == f);
  AnchorSet a;
  a.indices = {3, 1, 0};
  const Json j = feedback_to_json(f, &a, nullptr);
  CHECK(!j["groups"][0].contains("words"));
  const auto v = vocab_of(4);
  const Json w = feedback_to_json(f, &a, &v);
  CHECK(w["groups"][0]["words"] == Json::array({"t0", "t3"}));
  CHECK_THROWS_AS(feedback_from_json(Json::parse("{\"groups\": [{\"anchors\": [\"x\"]}]}")), ParseError);
}

TEST_CASE("topic models") {
  TopicMatrix t{test::random_stochastic(6, 2, 2), {"first", "second"}};
  const auto v = vocab_of(6);
  const Json j = topics_to_json(t, v, 3, true);
  CHECK(j["num_words"] == 6);
  CHECK(j["num_topics"] == 2);
  CHECK(j["topics"][0]["top_words"].size() == 3);
  const auto back = topics_from_json(Json::parse(j.dump()));
  CHECK(back.A == t.A);
  CHECK(back.topic_names == t.topic_names);
  CHECK_THROWS_AS(topics_from_json(topics_to_json(t, v, 3, false)), ParseError);
  CHECK_THROWS_AS(topics_to_json(t, vocab_of(5), 3, true), ValidationError);
}

TEST_CASE("binary topic cache") {
  const auto dir = test::temp_dir("topics");
  TopicMatrix t{test::random_stochastic(9, 4, 3), {}};
  write_topic_cache(t, dir / "a.bin");
  CHECK(std::filesystem::file_size(dir / "a.bin") == 24 + 9 * 4 * 8);
  CHECK(read_topic_cache(dir / "a.bin").A == t.A);
  {
    std::ofstream bad(dir / "b.bin", std::ios::binary);
    bad << "not a cache at all, really";
  }
  CHECK_THROWS_AS(read_topic_cache(dir / "b.bin"), ParseError);
  CHECK_THROWS_AS(read_topic_cache(dir / "missing.bin"), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ideal and subtopic models") {
  auto ideal = random_ideal_model(12, 3, 20.0, 0.5, 0.6, 4);
  ideal.tau = {0.6, 2.5, true};
  const auto back = ideal_model_from_json(Json::parse(ideal_model_to_json(ideal).dump()));
  CHECK(back.M == ideal.M);
  CHECK(back.R_M == ideal.R_M);
  CHECK(back.tau.focus == 0.6);
  CHECK(back.tau.concentration == 2.5);
  CHECK(back.tau.spread);

  SubtopicOptions o;
  o.group_sizes = {2, 1, 3};
  o.concentration = 8.0;
  o.plant_anchors = true;
  const auto m = sample_subtopics(ideal, o);
  const auto mb = subtopic_model_from_json(Json::parse(subtopic_model_to_json(m).dump()));
  CHECK(mb.A == m.A);
  CHECK(mb.R_A == m.R_A);
  CHECK(mb.groups == m.groups);
  CHECK(mb.planted_anchors == m.planted_anchors);
  CHECK(mb.base_vocab == m.base_vocab);
  CHECK(mb.anchor_mass == m.anchor_mass);
  CHECK_THROWS_AS(ideal_model_from_json(Json::parse("{}")), ParseError);
}

TEST_CASE("simulation config round trip") {
  SimulationConfig c;
  c.vocab_size = 321;
  c.rho = 0.4;
  c.subtopics.group_sizes = {3, 4};
  c.subtopics.plant_anchors = true;
  c.tau.spread = true;
  c.generation.num_docs = 77;
  c.generation.poisson_length = true;
  const Json j = simulation_config_to_json(c);
  const auto d = simulation_config_from_json(Json::parse(j.dump()));
  CHECK(simulation_config_to_json(d) == j);
  CHECK(d.vocab_size == 321);
  CHECK(d.subtopics.group_sizes == c.subtopics.group_sizes);
  CHECK(d.tau.spread);
}

TEST_CASE("metrics and intrusion documents") {
  MetricsReport r;
  r.loglik_per_token = -3.5;
  r.coherence_mean = -20.0;
  r.pct_unique_top_words = 0.75;
  r.avg_topic_entropy = 2.0;
  r.coherence.per_topic = {-19.0, -21.0};
  r.entropy.per_topic = {1.5, 2.5};
  const Json m = metrics_to_json(r);
  CHECK(m["loglik_per_token"] == -3.5);
  CHECK(m["pct_unique_top_words"] == 0.75);

  IntrusionSet s;
  IntrusionItem item;
  item.topic_id = 1;
  item.shown = {4, 2, 9};
  item.shown_words = {"a", "b", "c"};
  item.intruder_position = 2;
  item.source_topic = 0;
  s.items.push_back(item);
  const std::string items = intrusion_items_to_json(s).dump();
  CHECK(items.find("intruder_position") == std::string::npos);
  CHECK(items.find("source_topic") == std::string::npos);
  CHECK(intrusion_key_to_json(s).dump().find("intruder_position") != std::string::npos);
}

TEST_CASE("JSON files are written atomically and end with a newline") {
  const auto dir = test::temp_dir("json");
  const Json j = {{"b", 1}, {"a", Json::array({1.5, 2})}};
  write_json_file(dir / "x.json", j);
  std::ifstream in(dir / "x.json");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.back() == '\n');
  CHECK(text.find("\"b\"") < text.find("\"a\""));
  CHECK(read_json_file(dir / "x.json") == j);
  for (const auto& e : std::filesystem::directory_iterator(dir)) CHECK(e.path().filename() == "x.json");
  std::ofstream(dir / "bad.json") << "{ nope";
  CHECK_THROWS_AS(read_json_file(dir / "bad.json"), ParseError);
  CHECK_THROWS_AS(read_json_file(dir / "none.json"), ParseError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
