#include "itm/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "itm/cooccur.hpp"
#include "itm/error.hpp"
#include "itm/rng.hpp"

namespace itm {

SimulationConfig simulation_config_from_json(const Json& j) {
  try {
    SimulationConfig c;
    const auto& ideal = j.at("ideal");
    c.vocab_size = ideal.value("vocab_size", c.vocab_size);
    c.num_topics = ideal.value("num_topics", c.num_topics);
    c.word_concentration = ideal.value("word_concentration", c.word_concentration);
    c.core_weight = ideal.value("core_weight", c.core_weight);
    c.rho = ideal.value("rho", c.rho);
    c.ideal_seed = ideal.value("seed", c.ideal_seed);

    const auto& sub = j.at("subtopics");
    c.subtopics.group_sizes = sub.at("group_sizes").get<std::vector<std::size_t>>();
    c.subtopics.concentration = sub.value("concentration", c.subtopics.concentration);
    c.subtopics.plant_anchors = sub.value("plant_anchors", c.subtopics.plant_anchors);
    c.subtopics.anchor_mass = sub.value("anchor_mass", c.subtopics.anchor_mass);
    const auto split = sub.value("split", std::string("within_group_diagonal"));
    if (split == "within_group_diagonal") c.subtopics.split = PairSplit::within_group_diagonal;
    else if (split == "uniform") c.subtopics.split = PairSplit::uniform;
    else throw ValidationError("unknown split '" + split + "'");
    c.subtopics.seed = sub.value("seed", c.subtopics.seed);

    if (j.contains("documents")) {
      const auto& d = j["documents"];
      c.tau.focus = d.value("focus", c.tau.focus);
      c.tau.concentration = d.value("concentration", c.tau.concentration);
      c.tau.spread = d.value("spread", c.tau.spread);
      c.generation.num_docs = d.value("num_docs", c.generation.num_docs);
      c.generation.doc_length = d.value("doc_length", c.generation.doc_length);
      c.generation.poisson_length = d.value("poisson_length", c.generation.poisson_length);
      const auto mode = d.value("mode", std::string("mixture"));
      if (mode == "mixture") c.generation.mode = GenerationMode::mixture;
      else if (mode == "exact_pairs") c.generation.mode = GenerationMode::exact_pairs;
      else throw ValidationError("unknown generation mode '" + mode + "'");
      c.generation.seed = d.value("seed", c.generation.seed);
      c.generation.label_names = d.value("label_names", std::vector<std::string>{});
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid simulation config: ") + e.what(), 0);
  }
}

Json simulation_config_to_json(const SimulationConfig& c) {
  return Json{
      {"ideal",
       {{"vocab_size", c.vocab_size},
        {"num_topics", c.num_topics},
        {"word_concentration", c.word_concentration},
        {"core_weight", c.core_weight},
        {"rho", c.rho},
        {"seed", c.ideal_seed}}},
      {"subtopics",
       {{"group_sizes", c.subtopics.group_sizes},
        {"concentration", c.subtopics.concentration},
        {"plant_anchors", c.subtopics.plant_anchors},
        {"anchor_mass", c.subtopics.anchor_mass},
        {"split", c.subtopics.split == PairSplit::uniform ? "uniform" : "within_group_diagonal"},
        {"seed", c.subtopics.seed},
        {"distribution", "dirichlet"}}},
      {"documents",
       {{"focus", c.tau.focus},
        {"concentration", c.tau.concentration},
        {"spread", c.tau.spread},
        {"num_docs", c.generation.num_docs},
        {"doc_length", c.generation.doc_length},
        {"poisson_length", c.generation.poisson_length},
        {"mode", c.generation.mode == GenerationMode::mixture ? "mixture" : "exact_pairs"},
        {"seed", c.generation.seed},
        {"label_names", c.generation.label_names}}}};
}

Simulation simulate(const SimulationConfig& config) {
  auto ideal = random_ideal_model(config.vocab_size, config.num_topics, config.word_concentration, config.core_weight,
                                  config.rho, config.ideal_seed);
  ideal.tau = config.tau;
  auto model = sample_subtopics(ideal, config.subtopics);
  auto corpus = generate_corpus(model, ideal, config.generation);
  return Simulation{std::move(ideal), std::move(model), std::move(corpus)};
}

std::vector<std::size_t> sample_documents(std::size_t num_docs, std::size_t size, std::uint64_t seed) {
  std::vector<std::size_t> idx(num_docs);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (size >= num_docs) return idx;
  Rng rng(derive_seed(seed, 0));
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, num_docs - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

std::vector<double> knn_accuracies(const TopicMatrix& topics, const Corpus& corpus,
                                   const std::vector<std::size_t>& sample, const std::vector<std::size_t>& labels,
                                   const ExperimentConfig& config) {
  const auto dt = infer_doc_topics(topics, corpus, config.gibbs, sample);
  std::vector<double> acc;
  for (int k : config.ks) acc.push_back(knn_loocv(dt.theta, labels, k, config.distance));
  return acc;
}

}  // namespace

ExperimentResult run_knn_experiment(const Corpus& corpus, const ExperimentConfig& config) {
  if (!corpus.labeled()) throw ValidationError("the k-NN experiment needs a fully labeled corpus");
  ExperimentResult out;
  const auto stats = build_cooccurrence(corpus);
  const auto df = corpus.document_frequency();
  out.anchors = find_anchors(stats, df, config.anchors);
  out.oracle = oracle_groupings(corpus, out.anchors, config.oracle);
  const auto& feedback = out.oracle.feedback;
  if (feedback.groups.empty()) throw ValidationError("oracle produced no groups");

  out.sample = sample_documents(corpus.num_documents(), config.sample_size, config.sample_seed);
  std::vector<std::size_t> labels;
  for (auto d : out.sample) labels.push_back(*corpus.documents()[d].label);

  auto add = [&](std::string name, const TopicMatrix& topics) {
    out.rows.push_back({std::move(name), static_cast<std::size_t>(topics.num_topics()),
                        knn_accuracies(topics, corpus, out.sample, labels, config)});
  };

  add("full", full_interactive_recovery(stats, out.anchors, feedback, config.solver));
  add("partial", partial_interactive_recovery(stats, out.anchors, feedback, config.solver));
  add("all", recover_topics(stats, out.anchors, config.solver));

  std::vector<std::size_t> selected;
  for (const auto& g : feedback.groups) selected.insert(selected.end(), g.begin(), g.end());
  add("select", recover_topics(stats, select_anchors(out.anchors, selected), config.solver));

  auto vanilla_opts = config.anchors;
  vanilla_opts.num_anchors = feedback.groups.size();
  add("vanilla", recover_topics(stats, find_anchors(stats, df, vanilla_opts), config.solver));
  return out;
}

Json experiment_to_json(const ExperimentResult& result, const ExperimentConfig& config, const Vocabulary& vocab) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    Json acc = Json::object();
    for (std::size_t i = 0; i < config.ks.size(); ++i) acc["k=" + std::to_string(config.ks[i])] = r.accuracy[i];
    rows.push_back({{"model", r.name}, {"num_topics", r.num_topics}, {"accuracy", std::move(acc)}});
  }
  return Json{{"table", std::move(rows)},
              {"ks", config.ks},
              {"sample_size", result.sample.size()},
              {"distance", config.distance == Distance::euclidean ? "euclidean" : "total_variation"},
              {"anchors", anchors_to_json(result.anchors, vocab)},
              {"groups", feedback_to_json(result.oracle.feedback, &result.anchors, &vocab)},
              {"warnings", result.oracle.warnings},
              {"params",
               {{"num_anchors", config.anchors.num_anchors},
                {"candidate_filter", config.anchors.candidate_filter},
                {"per_category_count", config.oracle.per_category_count},
                {"solver_step", config.solver.step},
                {"solver_tol", config.solver.tol},
                {"solver_max_iter", config.solver.max_iter},
                {"gibbs_alpha", config.gibbs.alpha},
                {"gibbs_iterations", config.gibbs.iterations},
                {"gibbs_seed", config.gibbs.seed},
                {"sample_seed", config.sample_seed},
                {"anchor_seed", config.anchors.seed}}}};
}

std::string format_experiment_table(const ExperimentResult& result, const ExperimentConfig& config) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-14s", "Model");
  out << buf;
  for (int k : config.ks) {
    std::snprintf(buf, sizeof buf, "  k = %-4d", k);
    out << buf;
  }
  out << '\n';
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%-14s", (r.name + " " + std::to_string(r.num_topics)).c_str());
    out << buf;
    for (double a : r.accuracy) {
      std::snprintf(buf, sizeof buf, "  %8.3f", a);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace itm
