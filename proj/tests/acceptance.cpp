// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failures.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "edit_gen.hpp"
#include "helpers.hpp"
#include "itm/error.hpp"
#include "itm/experiment.hpp"
#include "itm/service.hpp"
#include "itm/session.hpp"

using namespace itm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Args {
  fs::path data;
  fs::path cli;
};

// Dirichlet covariance of a subtopic column with mean m: (diag m - m m^T) / (c + 1).
Matrix dirichlet_cov(const Vector& m, double c) {
  Matrix S = -m * m.transpose();
  S.diagonal() += m;
  return S / (c + 1.0);
}

Outcome subtopic_bias_check(const Args&) {
  const auto t0 = std::chrono::steady_clock::now();
  IdealizedModel ideal = random_ideal_model(5, 2, 5.0, 0.5, 0.6, 11);
  const int draws = 20000;
  std::string detail;
  bool pass = true;
  for (double c : {8.0, kInfiniteConcentration}) {
    // Expected value, built here from the model parameters alone.
    Matrix expected = ideal.M * ideal.R_M * ideal.M.transpose();
    if (std::isfinite(c))
      for (Eigen::Index k = 0; k < 2; ++k) expected += ideal.R_M(k, k) * dirichlet_cov(ideal.M.col(k), c);

    Matrix sum = Matrix::Zero(5, 5), sum2 = Matrix::Zero(5, 5);
    for (int d = 0; d < draws; ++d) {
      SubtopicOptions o;
      o.group_sizes = {2, 3};
      o.concentration = c;
      o.split = PairSplit::within_group_diagonal;
      o.seed = static_cast<std::uint64_t>(d) + 1;
      const auto m = sample_subtopics(ideal, o);
      const Matrix Q = m.A * m.R_A * m.A.transpose();
      sum += Q;
      sum2 += Q.cwiseProduct(Q);
    }
    const Matrix mean = sum / draws;
    const Matrix var = (sum2 / draws - mean.cwiseProduct(mean)).cwiseMax(0.0) * (draws / (draws - 1.0));
    const Matrix se = (var / draws).cwiseSqrt();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < 25; ++i) {
      const double err = std::abs(mean(i) - expected(i));
      const double bound = std::max(3.0 * se(i), 1e-12);
      worst = std::max(worst, err / bound);
    }
    pass = pass && worst <= 1.0;
    detail += fmt("c=%g: max |err|/bound %.3f; ", c, worst);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  pass = pass && secs < 60.0;
  return {pass, detail + fmt("%d draws each, %.1f s", draws, secs)};
}

Outcome exact_anchors(const Args&) {
  const Eigen::Index V = 200, K = 5;
  bool pass = true;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Matrix A = test::planted_separable(V, K, 0.05, seed);
    const auto stats = analytic_cooccurrence(A, test::assortative_pair_matrix(K, 0.5));
    const std::vector<std::size_t> df(static_cast<std::size_t>(V), 1000);
    const auto anchors = find_anchors(stats, df, {static_cast<std::size_t>(K), 0, std::nullopt, 1});
    auto found = anchors.indices;
    std::sort(found.begin(), found.end());
    if (found != std::vector<WordId>{0, 1, 2, 3, 4}) {
      pass = false;
      continue;
    }
    const auto topics = recover_topics(stats, anchors);
    for (Eigen::Index t = 0; t < K; ++t) {
      const auto k = static_cast<Eigen::Index>(anchors.indices[static_cast<std::size_t>(t)]);
      worst = std::max(worst, (topics.A.col(t) - A.col(k)).cwiseAbs().maxCoeff());
    }
  }
  pass = pass && worst <= 1e-3;
  return {pass, fmt("3 models, anchors exact: %s, max |A - A*| = %.2e (tol 1e-3)", pass ? "yes" : "no", worst)};
}

Outcome simplex_grid(const Args&) {
  double worst = 0.0;
  int words = 0;
  for (std::uint64_t inst = 1; inst <= 100; ++inst) {
    const Matrix A = test::random_stochastic(8, 3, inst);
    const auto stats = analytic_cooccurrence(A, test::random_pair_matrix(3, inst + 1000));
    std::mt19937_64 rng(inst);
    const WordId a = rng() % 8;
    WordId b = rng() % 7;
    if (b >= a) ++b;
    AnchorSet anchors;
    anchors.indices = {a, b};
    anchors.residuals = {1.0, 1.0};
    const auto w = solve_convex_weights(stats, anchors);
    const Vector sa = stats.Qbar.row(a).transpose(), sb = stats.Qbar.row(b).transpose();
    for (Eigen::Index i = 0; i < 8; ++i) {
      if (i == static_cast<Eigen::Index>(a) || i == static_cast<Eigen::Index>(b)) continue;
      const Vector y = stats.Qbar.row(i).transpose();
      double grid = std::numeric_limits<double>::infinity();
      for (int g = 0; g <= 1000; ++g) {
        const double x = g / 1000.0;
        grid = std::min(grid, (y - x * sa - (1.0 - x) * sb).squaredNorm());
      }
      worst = std::max(worst, std::abs(w.residual(i) - grid));
      ++words;
    }
  }
  return {worst <= 1e-3, fmt("100 instances, %d words, max |objective - grid| = %.2e (tol 1e-3)", words, worst)};
}

// Spurious anchors: candidates that are ordinary topic words whose sampled
// co-occurrence rows merely look extreme. They are taken from a search that may
// pick any word seen in a handful of documents, and appended to the planted anchors.
Outcome spurious(const Args&) {
  const std::size_t J = 8;
  double sum_full = 0.0, sum_partial = 0.0;
  int seeds = 0, partial_wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimulationConfig c;
    c.vocab_size = 300;
    c.num_topics = 4;
    c.core_weight = 0.6;
    c.rho = 0.9;
    c.ideal_seed = seed;
    c.subtopics.group_sizes = {3, 3, 3, 3};
    c.subtopics.concentration = 200.0;
    c.subtopics.plant_anchors = true;
    c.subtopics.seed = seed + 100;
    c.generation.num_docs = 3000;
    c.generation.doc_length = 30;
    c.generation.seed = seed + 200;
    const auto sim = simulate(c);
    const auto stats = build_cooccurrence(sim.corpus);
    const auto& planted = sim.model.planted_anchors;
    auto is_planted = [&](WordId w) { return std::find(planted.begin(), planted.end(), w) != planted.end(); };

    AnchorSet anchors;
    anchors.indices = planted;
    const auto loose = find_anchors(stats, sim.corpus.document_frequency(), {planted.size() + J, 3, std::nullopt, 1});
    for (auto w : loose.indices)
      if (!is_planted(w) && anchors.indices.size() < planted.size() + J) anchors.indices.push_back(w);
    if (anchors.indices.size() != planted.size() + J) return {false, "too few spurious candidates"};
    anchors.residuals.assign(anchors.indices.size(), 1.0);

    // Oracle groups over every candidate, then the spurious ones are left out.
    auto oracle = oracle_groupings(sim.corpus, anchors, {anchors.size(), 0});
    for (auto& g : oracle.feedback.groups)
      std::erase_if(g, [&](std::size_t p) { return !is_planted(anchors.indices[p]); });

    const Matrix truth = sim.model.effective_ideal(sim.ideal);
    auto l1 = [&](const TopicMatrix& t) {
      double e = 0.0;
      for (std::size_t g = 0; g < oracle.feedback.groups.size(); ++g) {
        const auto k = static_cast<Eigen::Index>(std::stoul(oracle.feedback.names[g].substr(5)));
        e += (t.A.col(static_cast<Eigen::Index>(g)) - truth.col(k)).lpNorm<1>();
      }
      return e / static_cast<double>(oracle.feedback.groups.size());
    };
    const double full = l1(full_interactive_recovery(stats, anchors, oracle.feedback));
    const double partial = l1(partial_interactive_recovery(stats, anchors, oracle.feedback));
    sum_full += full;
    sum_partial += partial;
    partial_wins += partial <= full;
    per_seed += fmt(" %.3f/%.3f", partial, full);
    ++seeds;
  }
  const double mf = sum_full / seeds, mp = sum_partial / seeds;
  return {mp <= mf, fmt("%d seeds, 12 planted + %zu spurious candidates; mean l1 partial %.4f, full %.4f; "
                        "partial <= full on %d seeds; per seed partial/full:%s",
                        seeds, J, mp, mf, partial_wins, per_seed.c_str())};
}

Outcome table(const Args& args) {
  const auto corpus = load_corpus(CorpusPaths::in_directory(args.data));
  ExperimentConfig cfg;
  cfg.anchors.num_anchors = 250;
  cfg.anchors.candidate_filter = 10;
  cfg.oracle.per_category_count = 10;
  const auto r = run_knn_experiment(corpus, cfg);
  std::cout << format_experiment_table(r, cfg);
  auto acc = [&](const std::string& name, std::size_t i) {
    for (const auto& row : r.rows)
      if (row.name == name) return row.accuracy[i];
    throw std::logic_error("no row " + name);
  };
  std::string broken;
  for (std::size_t i = 0; i < cfg.ks.size(); ++i) {
    const auto k = std::to_string(cfg.ks[i]);
    auto need = [&](bool ok, const std::string& what) {
      if (!ok) broken += " " + what + "@k=" + k;
    };
    need(acc("partial", i) >= acc("full", i), "partial>=full");
    need(acc("full", i) > acc("all", i), "full>all");
    need(acc("full", i) > acc("select", i), "full>select");
    need(acc("all", i) > acc("vanilla", i), "all>vanilla");
    need(acc("select", i) > acc("vanilla", i), "select>vanilla");
  }
  return {broken.empty(), "ordering partial >= full > all, select > vanilla at every k; violated:" +
                              (broken.empty() ? std::string(" none") : broken)};
}

Outcome metric_identities(const Args&) {
  std::vector<std::string> failed;
  auto need = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };
  const Eigen::Index V = 8;
  TopicMatrix uniform{Matrix::Constant(V, 2, 1.0 / V), {}};
  const auto ent = topic_entropy(uniform);
  need(ent.per_topic[0] == std::log(8.0) && ent.per_topic[1] == std::log(8.0), "entropy uniform");
  TopicMatrix point{Matrix::Zero(V, 2), {}};
  point.A(0, 0) = point.A(3, 1) = 1.0;
  need(topic_entropy(point).per_topic == std::vector<double>{0.0, 0.0}, "entropy deterministic");

  TopicMatrix disjoint{Matrix::Zero(V, 2), {}};
  disjoint.A.block(0, 0, 4, 1).setConstant(0.25);
  disjoint.A.block(4, 1, 4, 1).setConstant(0.25);
  need(unique_top_words(disjoint, 4) == 1.0, "unique disjoint");
  TopicMatrix same{Matrix::Zero(V, 2), {}};
  same.A.block(0, 0, 4, 2).setConstant(0.25);
  need(unique_top_words(same, 4) == 0.0, "unique identical");
  TopicMatrix shared{Matrix::Zero(V, 2), {}};
  shared.A(0, 0) = shared.A(1, 0) = shared.A(1, 1) = shared.A(2, 1) = 0.5;
  need(unique_top_words(shared, 2) == 0.5, "unique one shared word");

  // Toy coherence, eps = 1: D(w0) = 1, D(w1) = 2, D(w0, w1) = 1. The score divides by the higher-ranked word.
  const auto corpus = test::corpus_from_ids(3, {{0, 1}, {1, 2}, {2}});
  TopicMatrix toy{Matrix::Zero(3, 1), {}};
  toy.A(0, 0) = 0.6;
  toy.A(1, 0) = 0.4;
  need(coherence(toy, corpus, 2, 1.0).per_topic[0] == std::log((1.0 + 1.0) / 1.0), "coherence toy");
  TopicMatrix toy2{Matrix::Zero(3, 1), {}};
  toy2.A(1, 0) = 0.6;
  toy2.A(0, 0) = 0.4;
  need(coherence(toy2, corpus, 2, 1.0).per_topic[0] == std::log((1.0 + 1.0) / 2.0), "coherence toy reversed");

  const auto big = test::corpus_from_ids(V, {{0, 1, 1, 5}, {7, 2}, {3, 3, 3}});
  const auto ll = loglik_per_token(uniform, big);
  need(std::abs(ll.per_token + std::log(8.0)) <= 1e-9, "loglik uniform");
  std::string detail = "entropy, unique top words, toy coherence, uniform loglik";
  for (const auto& f : failed) detail += "; FAILED " + f;
  return {failed.empty(), detail};
}

int run_cli(const Args& a, const std::string& args) {
  const std::string cmd = a.cli.string() + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism(const Args& args) {
  const auto dir = test::temp_dir("accept-cli");
  SimulationConfig c;
  c.vocab_size = 200;
  c.num_topics = 4;
  c.subtopics.group_sizes = {2, 2, 2, 2};
  c.subtopics.concentration = 10.0;
  c.subtopics.plant_anchors = true;
  c.generation.num_docs = 800;
  c.generation.doc_length = 25;
  write_json_file(dir / "sim.json", simulation_config_to_json(c));

  auto pipeline = [&](const fs::path& out) {
    const std::string o = out.string() + "/";
    const std::string s = " --corpus " + o + "sim";
    const std::vector<std::string> steps = {
        "simulate --config " + (dir / "sim.json").string() + " --out " + o + "sim",
        "prune" + s + " --min-doc-freq 3 --out " + o + "pruned",
        "anchors" + s + " -T 20 --candidate-filter 5 --out " + o + "anchors.json",
        "anchors" + s + " -T 20 --candidate-filter 5 --projection-dim 50 --seed 7 --out " + o + "projected.json",
        "oracle" + s + " --anchors " + o + "anchors.json --per-category 2 --out " + o + "groups.json",
        "recover" + s + " --anchors " + o + "anchors.json --groups " + o + "groups.json --mode full --out " + o +
            "full.json --binary " + o + "full.bin",
        "recover" + s + " --anchors " + o + "anchors.json --groups " + o + "groups.json --mode partial --out " + o +
            "partial.json",
        "recover" + s + " --anchors " + o + "anchors.json --mode all --out " + o + "all.json",
        "evaluate" + s + " --topics " + o + "partial.json --gibbs-iterations 20 --out " + o + "metrics.json" +
            " --intrusion-out " + o + "items.json --intrusion-key " + o + "key.json",
        "experiment" + s + " -T 20 --candidate-filter 5 --per-category 2 --gibbs-iterations 20 --sample 300" +
            " --ks 5,10 --out " + o + "experiment.json --table " + o + "table.txt"};
    std::string failed;
    for (const auto& step : steps)
      if (run_cli(args, step) != 0) failed += " [" + step.substr(0, step.find(' ')) + "]";
    return failed;
  };
  const auto fa = pipeline(dir / "a");
  const auto fb = pipeline(dir / "b");
  if (!fa.empty() || !fb.empty()) return {false, "subcommand failed:" + fa + fb};

  std::size_t compared = 0;
  std::string differ;
  const std::string pa = (dir / "a").string(), pb = (dir / "b").string();
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "a");
    std::string b = slurp(dir / "b" / rel);
    // Manifests record their own output paths; align the run directory.
    for (std::size_t at; (at = b.find(pb)) != std::string::npos;) b.replace(at, pb.size(), pa);
    if (slurp(e.path()) != b) differ += " " + rel.string();
    ++compared;
  }
  fs::remove_all(dir);
  return {differ.empty() && compared > 0,
          fmt("7 subcommands in 10 invocations, run twice, %zu output files compared byte for byte; differing:%s", compared,
              differ.empty() ? " none" : differ.c_str())};
}

Outcome event_sourcing(const Args&) {
  const auto dir = test::temp_dir("accept-events");
  SimulationConfig c;
  c.vocab_size = 200;
  c.num_topics = 4;
  c.subtopics.group_sizes = {3, 3, 3, 3};
  c.subtopics.plant_anchors = true;
  c.generation.num_docs = 600;
  c.generation.doc_length = 25;
  const auto sim = simulate(c);
  const auto cdir = dir / "corpora" / "sim";
  fs::create_directories(cdir);
  write_corpus(sim.corpus, CorpusPaths{cdir / "corpus.txt", cdir / "vocab.txt", cdir / "labels.txt"});

  ServiceConfig sc;
  sc.data_dir = dir;
  const std::size_t T = 40;
  int valid = 0, conflicts = 0, overlaps = 0;
  std::string id;
  Json final_state;
  {
    Service svc(sc);
    id = svc.create_session({{"corpus", "sim"}, {"num_anchors", T}, {"candidate_filter", 5}})["id"].get<std::string>();
    test::EditGenerator gen(T, 42, 0.25);
    while (valid < 1000) {
      const auto e = gen.next(svc.snapshot(id)->groups);
      try {
        svc.edit_groups(id, edit_to_json(e));
        ++valid;
      } catch (const ConflictError&) {
        ++conflicts;
      }
      overlaps += !test::disjoint_nonempty(svc.snapshot(id)->groups);
    }
    final_state = session_to_json(*svc.snapshot(id));
  }
  // Replay the persisted log in a fresh process-equivalent service.
  Service reloaded(sc);
  const auto s = reloaded.snapshot(id);
  const bool replay_ok = replay_groups(s->history, s->anchors.size()) == s->groups;
  const bool reload_ok = session_to_json(*s) == final_state;
  fs::remove_all(dir);
  return {replay_ok && reload_ok && overlaps == 0 && conflicts > 0,
          fmt("%d valid edits, %d conflicting edits rejected, %d overlapping states; replay %s, reload %s", valid,
              conflicts, overlaps, replay_ok ? "exact" : "DIFFERS", reload_ok ? "exact" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  Args args;
  std::vector<std::string> only;
  app.add_option("--data", args.data, "Bundled synthetic corpus directory")->required();
  app.add_option("--cli", args.cli, "Path of the itm executable")->required();
  app.add_option("--only", only, "Run only these checks");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const Args&)>>> checks = {
      {"subtopic_bias_monte_carlo", subtopic_bias_check},
      {"exact_anchor_recovery", exact_anchors},
      {"simplex_grid_equivalence", simplex_grid},
      {"partial_beats_full_spurious", spurious},
      {"knn_table_ordering", table},
      {"metric_identities", metric_identities},
      {"cli_determinism", cli_determinism},
      {"event_sourcing", event_sourcing},
  };
  int failures = 0, ran = 0;
  for (const auto& [name, check] : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = check(args);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no check matched\n";
    return 2;
  }
  return failures;
}
