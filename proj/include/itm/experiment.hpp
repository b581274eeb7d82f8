#pragma once

// End-to-end protocols shared by the CLI and the acceptance suite.

#include <string>
#include <vector>

#include "itm/anchors.hpp"
#include "itm/corpus.hpp"
#include "itm/metrics.hpp"
#include "itm/oracle_user.hpp"
#include "itm/recovery.hpp"
#include "itm/serialize.hpp"
#include "itm/subtopic_sim.hpp"

namespace itm {

/// Everything needed to regenerate a synthetic labeled corpus.
struct SimulationConfig {
  std::size_t vocab_size = 400;
  std::size_t num_topics = 5;
  double word_concentration = 50.0;
  double core_weight = 0.6;
  double rho = 0.9;
  std::uint64_t ideal_seed = 1;
  SubtopicOptions subtopics;
  DocumentPrior tau;
  CorpusGenOptions generation;
};

SimulationConfig simulation_config_from_json(const Json& j);
Json simulation_config_to_json(const SimulationConfig& config);

struct Simulation {
  IdealizedModel ideal;
  SubtopicModel model;
  Corpus corpus;
};

Simulation simulate(const SimulationConfig& config);

struct ExperimentConfig {
  AnchorOptions anchors;
  OracleConfig oracle;
  SolverOptions solver;
  GibbsOptions gibbs;
  std::vector<int> ks = {10, 20, 50, 100};
  std::size_t sample_size = 2000;
  std::uint64_t sample_seed = 1;
  Distance distance = Distance::total_variation;
};

struct VariantResult {
  std::string name;  // full, partial, all, select, vanilla
  std::size_t num_topics = 0;
  std::vector<double> accuracy;  // one per k
};

struct ExperimentResult {
  std::vector<VariantResult> rows;
  AnchorSet anchors;
  OracleResult oracle;
  std::vector<std::size_t> sample;  // evaluated document indices
};

/// k-NN LOOCV accuracy of document embeddings under the five model variants:
/// full / partial interactive recovery from oracle groups, all T anchors,
/// the selected anchors as separate topics, and a plain K-anchor model.
ExperimentResult run_knn_experiment(const Corpus& corpus, const ExperimentConfig& config);

Json experiment_to_json(const ExperimentResult& result, const ExperimentConfig& config, const Vocabulary& vocab);

/// Fixed-width text table, one row per variant.
std::string format_experiment_table(const ExperimentResult& result, const ExperimentConfig& config);

/// Deterministic uniform sample of min(size, D) document indices, sorted.
std::vector<std::size_t> sample_documents(std::size_t num_docs, std::size_t size, std::uint64_t seed);

}  // namespace itm
