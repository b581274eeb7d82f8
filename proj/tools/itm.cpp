// Batch driver: one subcommand per pipeline stage. Every run writes its JSON
// outputs plus a manifest recording inputs, parameters, seeds and outputs.

#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "itm/anchors.hpp"
#include "itm/cooccur.hpp"
#include "itm/corpus.hpp"
#include "itm/error.hpp"
#include "itm/experiment.hpp"
#include "itm/metrics.hpp"
#include "itm/oracle_user.hpp"
#include "itm/recovery.hpp"
#include "itm/serialize.hpp"

namespace fs = std::filesystem;
using namespace itm;

namespace {

// A flag combination CLI11 cannot express; exits with the usage status.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Manifest {
 public:
  Manifest(std::string command, bool timings) : timings_(timings) { j_["command"] = std::move(command); }

  void input(const std::string& name, const fs::path& p) { j_["inputs"][name] = p.string(); }
  void param(const std::string& name, Json v) { j_["params"][name] = std::move(v); }
  void output(const std::string& name, const fs::path& p) { j_["outputs"][name] = p.string(); }

  template <typename F>
  auto timed(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = f();
    if (timings_)
      j_["timings_seconds"][stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  void write(const fs::path& path) {
    if (j_.contains("outputs"))
      for (const auto& [name, p] : j_["outputs"].items())
        if (!fs::exists(p.get<std::string>())) throw Error("output '" + name + "' was not written: " + p.get<std::string>());
    write_json_file(path, j_);
  }

 private:
  Json j_;
  bool timings_;
};

struct CorpusArgs {
  std::string dir;
  std::string format = "triplets";

  void add(CLI::App* app) {
    app->add_option("--corpus", dir, "Directory holding corpus.txt, vocab.txt and optional labels.txt")
        ->required()
        ->check(CLI::ExistingDirectory);
    app->add_option("--format", format, "Count file format: triplets or uci")->capture_default_str();
  }
  Corpus load(Manifest& m) const {
    m.input("corpus", dir);
    m.param("format", format);
    return load_corpus(CorpusPaths::in_directory(dir), parse_corpus_format(format));
  }
};

struct Common {
  std::string out;
  std::string manifest;
  bool timings = false;

  void add(CLI::App* app, const std::string& out_help) {
    app->add_option("--out", out, out_help)->required();
    app->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    app->add_flag("--timings", timings, "Record stage timings in the manifest");
  }
  fs::path manifest_path() const { return manifest.empty() ? fs::path(out + ".manifest.json") : fs::path(manifest); }
};

struct AnchorArgs {
  std::size_t num_anchors = 500;
  std::size_t candidate_filter = 100;
  std::optional<std::size_t> projection_dim;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("-T,--num-anchors", num_anchors, "Number of candidate anchors")->capture_default_str();
    app->add_option("--candidate-filter", candidate_filter, "Minimum document frequency of an anchor candidate")
        ->capture_default_str();
    app->add_option("--projection-dim", projection_dim, "Random projection dimension (default: none)");
    app->add_option("--seed", seed, "Projection seed")->capture_default_str();
  }
  AnchorOptions options() const { return {num_anchors, candidate_filter, projection_dim, seed}; }
  void record(Manifest& m) const {
    m.param("num_anchors", num_anchors);
    m.param("candidate_filter", candidate_filter);
    m.param("projection_dim", projection_dim ? Json(*projection_dim) : Json(nullptr));
    m.param("anchor_seed", seed);
  }
};

struct SolverArgs {
  SolverOptions o;
  void add(CLI::App* app) {
    app->add_option("--solver-tol", o.tol, "Duality-gap tolerance of the simplex solver")->capture_default_str();
    app->add_option("--solver-max-iter", o.max_iter, "Iteration cap of the simplex solver")->capture_default_str();
    app->add_option("--solver-step", o.step, "Initial exponentiated-gradient step")->capture_default_str();
  }
  void record(Manifest& m) const {
    m.param("solver_tol", o.tol);
    m.param("solver_max_iter", o.max_iter);
    m.param("solver_step", o.step);
  }
};

struct GibbsArgs {
  GibbsOptions o;
  void add(CLI::App* app) {
    app->add_option("--alpha", o.alpha, "Symmetric document-topic prior")->capture_default_str();
    app->add_option("--gibbs-iterations", o.iterations, "Gibbs sweeps per document (half are burn-in)")
        ->capture_default_str();
    app->add_option("--gibbs-seed", o.seed, "Gibbs seed")->capture_default_str();
  }
  void record(Manifest& m) const {
    m.param("gibbs_alpha", o.alpha);
    m.param("gibbs_iterations", o.iterations);
    m.param("gibbs_seed", o.seed);
  }
};

CooccurrenceStats cooccurrence(const Corpus& corpus, const std::string& cache, Manifest& m) {
  return m.timed("cooccurrence", [&] {
    if (cache.empty()) return build_cooccurrence(corpus);
    m.param("cache", cache);
    return cached_cooccurrence(corpus, cache);
  });
}

CorpusPaths output_paths(const fs::path& dir, bool labeled) {
  CorpusPaths p{dir / "corpus.txt", dir / "vocab.txt", std::nullopt};
  if (labeled) p.labels = dir / "labels.txt";
  return p;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anchor-word topic modeling with grouping feedback"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (default: runtime choice)");

  // prune
  auto* prune = app.add_subcommand("prune", "Drop stopwords and rare words from a corpus");
  CorpusArgs prune_corpus;
  prune_corpus.add(prune);
  std::string prune_out, prune_stop, prune_manifest;
  std::size_t min_df = kDefaultMinDocFreq;
  bool prune_timings = false;
  prune->add_option("--out", prune_out, "Output corpus directory")->required();
  prune->add_option("--stopwords", prune_stop, "Stopword file, one word per line (default: built-in English list)");
  prune->add_option("--min-doc-freq", min_df, "Minimum document frequency")->capture_default_str();
  prune->add_option("--manifest", prune_manifest, "Manifest path (default: <out>/manifest.json)");
  prune->add_flag("--timings", prune_timings, "Record stage timings in the manifest");

  // anchors
  auto* anchors_cmd = app.add_subcommand("anchors", "Find candidate anchor words");
  CorpusArgs anchors_corpus;
  anchors_corpus.add(anchors_cmd);
  AnchorArgs anchor_args;
  anchor_args.add(anchors_cmd);
  Common anchors_common;
  anchors_common.add(anchors_cmd, "Anchor set JSON");
  std::string anchors_cache;
  anchors_cmd->add_option("--cache", anchors_cache, "Directory for the co-occurrence cache");

  // recover
  auto* recover = app.add_subcommand("recover", "Recover topics from anchors and optional groups");
  CorpusArgs recover_corpus;
  recover_corpus.add(recover);
  std::string recover_anchors, recover_groups, recover_mode = "partial", recover_cache, recover_binary;
  std::size_t recover_top_n = 10;
  recover->add_option("--anchors", recover_anchors, "Anchor set JSON")->required()->check(CLI::ExistingFile);
  recover->add_option("--groups", recover_groups, "Grouping feedback JSON (needed for full and partial)")
      ->check(CLI::ExistingFile);
  recover->add_option("--mode", recover_mode, "full, partial, or all (one topic per anchor)")
      ->check(CLI::IsMember({"full", "partial", "all"}))
      ->capture_default_str();
  recover->add_option("--top-n", recover_top_n, "Top words listed per topic")->capture_default_str();
  recover->add_option("--cache", recover_cache, "Directory for the co-occurrence cache");
  recover->add_option("--binary", recover_binary, "Also write the topic matrix as a binary cache");
  SolverArgs recover_solver;
  recover_solver.add(recover);
  Common recover_common;
  recover_common.add(recover, "Topic model JSON");

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic labeled corpus and its ground truth");
  std::string sim_config, sim_out, sim_manifest;
  bool sim_timings = false;
  simulate_cmd->add_option("--config", sim_config, "Simulation config JSON")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("--out", sim_out, "Output directory")->required();
  simulate_cmd->add_option("--manifest", sim_manifest, "Manifest path (default: <out>/manifest.json)");
  simulate_cmd->add_flag("--timings", sim_timings, "Record stage timings in the manifest");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Group anchors by their association with document labels");
  CorpusArgs oracle_corpus;
  oracle_corpus.add(oracle);
  std::string oracle_anchors;
  OracleConfig oracle_cfg;
  oracle->add_option("--anchors", oracle_anchors, "Anchor set JSON")->required()->check(CLI::ExistingFile);
  oracle->add_option("--per-category", oracle_cfg.per_category_count, "Anchors kept per category")
      ->capture_default_str();
  oracle->add_option("--min-occurrences", oracle_cfg.min_occurrences, "Ignore anchors seen fewer times")
      ->capture_default_str();
  Common oracle_common;
  oracle_common.add(oracle, "Grouping feedback JSON");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a topic model against a corpus");
  CorpusArgs eval_corpus;
  eval_corpus.add(evaluate);
  std::string eval_topics, intrusion_out, intrusion_key;
  EvaluationOptions eval_opts;
  std::uint64_t intrusion_seed = 1;
  evaluate->add_option("--topics", eval_topics, "Topic model JSON with full columns")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--top-n", eval_opts.top_n, "Top words for coherence and uniqueness")->capture_default_str();
  evaluate->add_option("--epsilon", eval_opts.epsilon, "Coherence smoothing")->capture_default_str();
  GibbsArgs eval_gibbs;
  eval_gibbs.add(evaluate);
  evaluate->add_option("--intrusion-out", intrusion_out, "Write word-intrusion items here");
  evaluate->add_option("--intrusion-key", intrusion_key, "Write the intrusion answer key here");
  evaluate->add_option("--intrusion-seed", intrusion_seed, "Intrusion seed")->capture_default_str();
  Common eval_common;
  eval_common.add(evaluate, "Metrics report JSON");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "k-NN classification accuracy of five model variants");
  CorpusArgs exp_corpus;
  exp_corpus.add(experiment);
  AnchorArgs exp_anchor;
  exp_anchor.add(experiment);
  SolverArgs exp_solver;
  exp_solver.add(experiment);
  GibbsArgs exp_gibbs;
  exp_gibbs.add(experiment);
  ExperimentConfig exp_cfg;
  std::string exp_distance = "tv", exp_table;
  experiment->add_option("--per-category", exp_cfg.oracle.per_category_count, "Oracle anchors per category")
      ->capture_default_str();
  experiment->add_option("--min-occurrences", exp_cfg.oracle.min_occurrences, "Oracle occurrence floor")
      ->capture_default_str();
  experiment->add_option("--ks", exp_cfg.ks, "Neighbor counts")->delimiter(',')->capture_default_str();
  experiment->add_option("--sample", exp_cfg.sample_size, "Documents evaluated")->capture_default_str();
  experiment->add_option("--sample-seed", exp_cfg.sample_seed, "Seed of the document sample")->capture_default_str();
  experiment->add_option("--distance", exp_distance, "tv or euclidean")->capture_default_str();
  experiment->add_option("--table", exp_table, "Also write the text table here");
  Common exp_common;
  exp_common.add(experiment, "Experiment result JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*prune) {
      Manifest m("prune", prune_timings);
      const auto corpus = prune_corpus.load(m);
      const auto stop = prune_stop.empty() ? default_english_stopwords() : load_stopwords(prune_stop);
      m.param("stopwords", prune_stop.empty() ? Json("default") : Json(prune_stop));
      m.param("min_doc_freq", min_df);
      const auto pruned = m.timed("prune", [&] { return prune_vocabulary(corpus, stop, min_df); });
      const auto paths = output_paths(prune_out, pruned.labeled());
      fs::create_directories(prune_out);
      write_corpus(pruned, paths);
      m.output("counts", paths.counts);
      m.output("vocab", paths.vocab);
      if (paths.labels) m.output("labels", *paths.labels);
      m.write(prune_manifest.empty() ? fs::path(prune_out) / "manifest.json" : fs::path(prune_manifest));
      std::cout << pruned.num_documents() << " documents, " << pruned.vocab_size() << " words\n";
    } else if (*anchors_cmd) {
      Manifest m("anchors", anchors_common.timings);
      const auto corpus = anchors_corpus.load(m);
      anchor_args.record(m);
      const auto stats = cooccurrence(corpus, anchors_cache, m);
      const auto df = corpus.document_frequency();
      const auto a = m.timed("anchors", [&] { return find_anchors(stats, df, anchor_args.options()); });
      ensure_parent(anchors_common.out);
      write_json_file(anchors_common.out, anchors_to_json(a, corpus.vocabulary()));
      m.output("anchors", anchors_common.out);
      m.write(anchors_common.manifest_path());
    } else if (*recover) {
      if (recover_mode != "all" && recover_groups.empty()) throw UsageError("--mode " + recover_mode + " needs --groups");
      Manifest m("recover", recover_common.timings);
      const auto corpus = recover_corpus.load(m);
      m.input("anchors", recover_anchors);
      m.param("mode", recover_mode);
      m.param("top_n", recover_top_n);
      recover_solver.record(m);
      const auto a = anchors_from_json(read_json_file(recover_anchors));
      const auto stats = cooccurrence(corpus, recover_cache, m);
      TopicMatrix topics;
      if (recover_mode == "all") {
        topics = m.timed("recover", [&] { return recover_topics(stats, a, recover_solver.o); });
      } else {
        m.input("groups", recover_groups);
        const auto feedback = feedback_from_json(read_json_file(recover_groups));
        topics = m.timed("recover", [&] {
          return recover_mode == "full" ? full_interactive_recovery(stats, a, feedback, recover_solver.o)
                                        : partial_interactive_recovery(stats, a, feedback, recover_solver.o);
        });
      }
      ensure_parent(recover_common.out);
      write_json_file(recover_common.out, topics_to_json(topics, corpus.vocabulary(), recover_top_n, true));
      m.output("topics", recover_common.out);
      if (!recover_binary.empty()) {
        write_topic_cache(topics, recover_binary);
        m.output("binary", recover_binary);
      }
      m.write(recover_common.manifest_path());
    } else if (*simulate_cmd) {
      Manifest m("simulate", sim_timings);
      m.input("config", sim_config);
      const auto cfg = simulation_config_from_json(read_json_file(sim_config));
      m.param("config", simulation_config_to_json(cfg));
      const auto sim = m.timed("simulate", [&] { return simulate(cfg); });
      const fs::path out = sim_out;
      fs::create_directories(out);
      const auto paths = output_paths(out, true);
      write_corpus(sim.corpus, paths);
      write_json_file(out / "ideal.json", ideal_model_to_json(sim.ideal));
      write_json_file(out / "subtopics.json", subtopic_model_to_json(sim.model));
      m.output("counts", paths.counts);
      m.output("vocab", paths.vocab);
      m.output("labels", out / "labels.txt");
      m.output("ideal", out / "ideal.json");
      m.output("subtopics", out / "subtopics.json");
      m.write(sim_manifest.empty() ? out / "manifest.json" : fs::path(sim_manifest));
    } else if (*oracle) {
      Manifest m("oracle", oracle_common.timings);
      const auto corpus = oracle_corpus.load(m);
      m.input("anchors", oracle_anchors);
      m.param("per_category_count", oracle_cfg.per_category_count);
      m.param("min_occurrences", oracle_cfg.min_occurrences);
      const auto a = anchors_from_json(read_json_file(oracle_anchors));
      const auto r = m.timed("oracle", [&] { return oracle_groupings(corpus, a, oracle_cfg); });
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      auto j = feedback_to_json(r.feedback, &a, &corpus.vocabulary());
      j["warnings"] = r.warnings;
      ensure_parent(oracle_common.out);
      write_json_file(oracle_common.out, j);
      m.output("groups", oracle_common.out);
      m.write(oracle_common.manifest_path());
    } else if (*evaluate) {
      if (intrusion_out.empty() != intrusion_key.empty())
        throw UsageError("--intrusion-out and --intrusion-key go together");
      Manifest m("evaluate", eval_common.timings);
      const auto corpus = eval_corpus.load(m);
      m.input("topics", eval_topics);
      eval_opts.gibbs = eval_gibbs.o;
      m.param("top_n", eval_opts.top_n);
      m.param("epsilon", eval_opts.epsilon);
      eval_gibbs.record(m);
      const auto topics = topics_from_json(read_json_file(eval_topics));
      const auto report = m.timed("evaluate", [&] { return evaluate_model(topics, corpus, eval_opts); });
      ensure_parent(eval_common.out);
      write_json_file(eval_common.out, metrics_to_json(report));
      m.output("metrics", eval_common.out);
      if (!intrusion_out.empty()) {
        m.param("intrusion_seed", intrusion_seed);
        const auto items = make_intrusion_items(topics, corpus.vocabulary(), eval_opts.top_n, intrusion_seed);
        for (const auto& w : items.warnings) std::cerr << "warning: " << w << '\n';
        ensure_parent(intrusion_out);
        ensure_parent(intrusion_key);
        write_json_file(intrusion_out, intrusion_items_to_json(items));
        write_json_file(intrusion_key, intrusion_key_to_json(items));
        m.output("intrusion_items", intrusion_out);
        m.output("intrusion_key", intrusion_key);
      }
      m.write(eval_common.manifest_path());
    } else if (*experiment) {
      Manifest m("experiment", exp_common.timings);
      const auto corpus = exp_corpus.load(m);
      exp_cfg.anchors = exp_anchor.options();
      exp_cfg.solver = exp_solver.o;
      exp_cfg.gibbs = exp_gibbs.o;
      exp_cfg.distance = parse_distance(exp_distance);
      exp_anchor.record(m);
      exp_solver.record(m);
      exp_gibbs.record(m);
      m.param("per_category_count", exp_cfg.oracle.per_category_count);
      m.param("min_occurrences", exp_cfg.oracle.min_occurrences);
      m.param("ks", exp_cfg.ks);
      m.param("sample_size", exp_cfg.sample_size);
      m.param("sample_seed", exp_cfg.sample_seed);
      m.param("distance", exp_distance);
      const auto r = m.timed("experiment", [&] { return run_knn_experiment(corpus, exp_cfg); });
      for (const auto& w : r.oracle.warnings) std::cerr << "warning: " << w << '\n';
      const auto table = format_experiment_table(r, exp_cfg);
      std::cout << table;
      ensure_parent(exp_common.out);
      write_json_file(exp_common.out, experiment_to_json(r, exp_cfg, corpus.vocabulary()));
      m.output("result", exp_common.out);
      if (!exp_table.empty()) {
        ensure_parent(exp_table);
        std::ofstream(exp_table) << table;
        m.output("table", exp_table);
      }
      m.write(exp_common.manifest_path());
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
