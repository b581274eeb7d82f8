#include "itm/subtopic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>

#include "itm/error.hpp"
#include "itm/rng.hpp"

namespace itm {

namespace {

constexpr double kTol = 1e-9;

void check_stochastic_columns(const Matrix& M, const char* what) {
  if ((M.array() < 0.0).any()) throw ValidationError(std::string(what) + " has negative entries");
  for (Eigen::Index k = 0; k < M.cols(); ++k)
    if (std::abs(M.col(k).sum() - 1.0) > kTol)
      throw ValidationError(std::string(what) + " column " + std::to_string(k) + " does not sum to 1");
}

// Dirichlet(concentration * mean) restricted to the support of `mean`.
Vector sample_dirichlet(const Vector& mean, double concentration, Rng& rng) {
  if (std::isinf(concentration)) return mean;
  Vector out = Vector::Zero(mean.size());
  double total = 0.0;
  Eigen::Index heaviest = 0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    if (mean[i] > mean[heaviest]) heaviest = i;
    if (mean[i] <= 0.0) continue;
    std::gamma_distribution<double> g(concentration * mean[i], 1.0);
    out[i] = g(rng);
    total += out[i];
  }
  if (!(total > 0.0)) {
    // Every shape parameter underflowed; the limit draw is a vertex.
    out.setZero();
    out[heaviest] = 1.0;
    return out;
  }
  return out / total;
}

Vector sample_dirichlet_params(const Vector& alpha, Rng& rng) {
  Vector out(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    std::gamma_distribution<double> g(alpha[i], 1.0);
    out[i] = g(rng);
  }
  const double s = out.sum();
  if (!(s > 0.0)) {
    Eigen::Index k;
    alpha.maxCoeff(&k);
    out.setZero();
    out[k] = 1.0;
    return out;
  }
  return out / s;
}

std::size_t draw_categorical(const std::vector<double>& cdf, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, cdf.back());
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng));
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> cumulative(const Eigen::Ref<const Vector>& p) {
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) cdf[static_cast<std::size_t>(i)] = acc += p[i];
  return cdf;
}

Vector label_weights(const Matrix& R_M) { return R_M.rowwise().sum(); }

std::vector<std::string> default_labels(std::size_t K, const std::vector<std::string>& given) {
  if (!given.empty()) {
    if (given.size() != K) throw ValidationError("label_names must have one entry per ideal topic");
    return given;
  }
  std::vector<std::string> names;
  for (std::size_t k = 0; k < K; ++k) names.push_back("topic" + std::to_string(k));
  return names;
}

// Appends a document from per-token subtopic draws; counts merged per word.
Document make_document(const std::vector<std::size_t>& words) {
  std::map<WordId, std::uint32_t> counts;
  for (auto w : words) ++counts[w];
  Document d;
  for (auto [w, c] : counts) d.counts.push_back({w, c});
  return d;
}

std::size_t draw_length(const CorpusGenOptions& opt, Rng& rng) {
  if (!opt.poisson_length) return opt.doc_length;
  std::poisson_distribution<std::size_t> p(static_cast<double>(opt.doc_length));
  return std::max<std::size_t>(2, p(rng));
}

void check_gen_options(const CorpusGenOptions& opt) {
  if (opt.num_docs == 0) throw ValidationError("num_docs must be >= 1");
  if (opt.doc_length < 2) throw ValidationError("doc_length must be >= 2");
  if (opt.mode == GenerationMode::exact_pairs && (opt.doc_length != 2 || opt.poisson_length))
    throw ValidationError("exact_pairs generation requires fixed doc_length = 2");
}

}  // namespace

void IdealizedModel::validate() const {
  if (M.cols() == 0) throw ValidationError("ideal model has no topics");
  check_stochastic_columns(M, "M");
  if (R_M.rows() != M.cols() || R_M.cols() != M.cols()) throw ValidationError("R_M must be K x K");
  if ((R_M.array() < 0.0).any()) throw ValidationError("R_M has negative entries");
  if ((R_M - R_M.transpose()).cwiseAbs().maxCoeff() > kTol) throw ValidationError("R_M is not symmetric");
  if (std::abs(R_M.sum() - 1.0) > kTol) throw ValidationError("R_M does not sum to 1");
  if (!(tau.focus >= 0.0 && tau.focus <= 1.0)) throw ValidationError("document prior focus must be in [0, 1]");
  if (!(tau.concentration > 0.0)) throw ValidationError("document prior concentration must be positive");
}

std::vector<std::size_t> SubtopicModel::group_of() const {
  std::vector<std::size_t> g(num_subtopics(), 0);
  for (std::size_t k = 0; k < groups.size(); ++k)
    for (auto t : groups[k]) g[t] = k;
  return g;
}

Matrix SubtopicModel::effective_ideal(const IdealizedModel& ideal) const {
  const auto K = static_cast<Eigen::Index>(groups.size());
  Matrix out = Matrix::Zero(A.rows(), K);
  const double keep = planted_anchors.empty() ? 1.0 : 1.0 - anchor_mass;
  out.topRows(static_cast<Eigen::Index>(base_vocab)) = keep * ideal.M;
  if (!planted_anchors.empty())
    for (Eigen::Index k = 0; k < K; ++k)
      for (auto t : groups[static_cast<std::size_t>(k)])
        out(static_cast<Eigen::Index>(planted_anchors[t]), k) =
            anchor_mass / static_cast<double>(groups[static_cast<std::size_t>(k)].size());
  return out;
}

Matrix split_pair_matrix(const Matrix& R_M, const std::vector<std::size_t>& group_sizes, PairSplit split) {
  const auto K = static_cast<std::size_t>(R_M.rows());
  if (group_sizes.size() != K) throw ValidationError("group_sizes must have one entry per ideal topic");
  std::vector<std::size_t> start(K + 1, 0);
  for (std::size_t k = 0; k < K; ++k) {
    if (group_sizes[k] == 0) throw ValidationError("group sizes must be >= 1");
    start[k + 1] = start[k] + group_sizes[k];
  }
  const auto T = static_cast<Eigen::Index>(start[K]);
  Matrix R = Matrix::Zero(T, T);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kk = 0; kk < K; ++kk) {
      const double mass = R_M(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(kk));
      if (k == kk && split == PairSplit::within_group_diagonal) {
        for (auto t = start[k]; t < start[k + 1]; ++t)
          R(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t)) = mass / static_cast<double>(group_sizes[k]);
        continue;
      }
      const double share = mass / static_cast<double>(group_sizes[k] * group_sizes[kk]);
      for (auto t = start[k]; t < start[k + 1]; ++t)
        for (auto u = start[kk]; u < start[kk + 1]; ++u)
          R(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(u)) = share;
    }
  return R;
}

SubtopicModel sample_subtopics(const IdealizedModel& ideal, const SubtopicOptions& options) {
  ideal.validate();
  if (!(options.concentration > 0.0)) throw ValidationError("concentration must be positive");
  if (options.plant_anchors && !(options.anchor_mass > 0.0 && options.anchor_mass < 1.0))
    throw ValidationError("anchor_mass must be in (0, 1)");
  const auto K = static_cast<std::size_t>(ideal.M.cols());
  const auto V = static_cast<std::size_t>(ideal.M.rows());
  if (!std::isinf(options.concentration))
    for (std::size_t k = 0; k < K; ++k)
      if ((ideal.M.col(static_cast<Eigen::Index>(k)).array() > 0.0).count() < 2)
        throw ValidationError("ideal topic " + std::to_string(k) +
                              " is supported on a single word; a finite concentration is undefined");

  SubtopicModel model;
  model.R_A = split_pair_matrix(ideal.R_M, options.group_sizes, options.split);
  const auto T = static_cast<std::size_t>(model.R_A.rows());
  model.base_vocab = V;
  model.anchor_mass = options.plant_anchors ? options.anchor_mass : 0.0;
  const auto Vp = options.plant_anchors ? V + T : V;
  model.A = Matrix::Zero(static_cast<Eigen::Index>(Vp), static_cast<Eigen::Index>(T));

  std::size_t t = 0;
  for (std::size_t k = 0; k < K; ++k) {
    model.groups.emplace_back();
    for (std::size_t j = 0; j < options.group_sizes[k]; ++j, ++t) {
      model.groups.back().push_back(t);
      Rng rng = make_rng(options.seed, t);
      const Vector col = sample_dirichlet(ideal.M.col(static_cast<Eigen::Index>(k)), options.concentration, rng);
      const auto ti = static_cast<Eigen::Index>(t);
      if (options.plant_anchors) {
        model.A.col(ti).head(static_cast<Eigen::Index>(V)) = (1.0 - options.anchor_mass) * col;
        model.A(static_cast<Eigen::Index>(V + t), ti) = options.anchor_mass;
        model.planted_anchors.push_back(V + t);
      } else {
        model.A.col(ti) = col;
      }
    }
  }
  return model;
}

Matrix subtopic_covariance(const Vector& mean, double concentration) {
  if (std::isinf(concentration)) return Matrix::Zero(mean.size(), mean.size());
  Matrix cov = -(mean * mean.transpose());
  cov.diagonal() += mean;
  return cov / (concentration + 1.0);
}

Matrix subtopic_bias(const IdealizedModel& ideal, const SubtopicOptions& options) {
  ideal.validate();
  if (!(options.concentration > 0.0)) throw ValidationError("concentration must be positive");
  const auto V = ideal.M.rows();
  Matrix bias = Matrix::Zero(V, V);
  for (Eigen::Index k = 0; k < ideal.M.cols(); ++k) {
    const double w = ideal.R_M(k, k);
    if (w == 0.0) continue;
    bias += w * subtopic_covariance(ideal.M.col(k), options.concentration);
  }
  return bias;
}

Matrix expected_subtopic_cooccurrence(const IdealizedModel& ideal, const SubtopicOptions& options) {
  ideal.validate();
  const Matrix R_A = split_pair_matrix(ideal.R_M, options.group_sizes, options.split);
  Matrix Q = ideal.M * ideal.R_M * ideal.M.transpose();
  std::size_t t = 0;
  for (Eigen::Index k = 0; k < ideal.M.cols(); ++k) {
    double w = 0.0;
    for (std::size_t j = 0; j < options.group_sizes[static_cast<std::size_t>(k)]; ++j, ++t)
      w += R_A(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t));
    if (w != 0.0) Q += w * subtopic_covariance(ideal.M.col(k), options.concentration);
  }
  return Q;
}

std::vector<std::string> synthetic_vocabulary(std::size_t base_vocab, std::size_t planted) {
  std::vector<std::string> words;
  words.reserve(base_vocab + planted);
  char buf[32];
  for (std::size_t i = 0; i < base_vocab; ++i) {
    std::snprintf(buf, sizeof buf, "w%04zu", i);
    words.emplace_back(buf);
  }
  for (std::size_t i = 0; i < planted; ++i) {
    std::snprintf(buf, sizeof buf, "anchor%03zu", i);
    words.emplace_back(buf);
  }
  return words;
}

Corpus generate_corpus(const SubtopicModel& model, const IdealizedModel& ideal, const CorpusGenOptions& options) {
  check_gen_options(options);
  ideal.validate();
  check_stochastic_columns(model.A, "A");
  const auto T = model.num_subtopics();
  const auto K = model.groups.size();
  if (static_cast<std::size_t>(ideal.M.cols()) != K) throw ValidationError("ideal model and subtopic groups differ in K");
  const auto group_of = model.group_of();

  std::vector<std::vector<double>> word_cdf(T);
  for (std::size_t t = 0; t < T; ++t) word_cdf[t] = cumulative(model.A.col(static_cast<Eigen::Index>(t)));

  std::vector<Document> docs(options.num_docs);
  if (options.mode == GenerationMode::exact_pairs) {
    Vector flat(static_cast<Eigen::Index>(T * T));
    for (std::size_t a = 0; a < T; ++a)
      for (std::size_t b = 0; b < T; ++b)
        flat[static_cast<Eigen::Index>(a * T + b)] = model.R_A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    if ((flat.array() < 0.0).any() || !(flat.sum() > 0.0)) throw ValidationError("R_A is not a distribution");
    const auto pair_cdf = cumulative(flat);
    for (std::size_t d = 0; d < options.num_docs; ++d) {
      Rng rng = make_rng(options.seed, d);
      const auto pair = draw_categorical(pair_cdf, rng);
      const std::size_t z1 = pair / T, z2 = pair % T;
      docs[d] = make_document({draw_categorical(word_cdf[z1], rng), draw_categorical(word_cdf[z2], rng)});
      docs[d].label = group_of[z1];
    }
  } else {
    const auto label_cdf = cumulative(label_weights(ideal.R_M));
    for (std::size_t d = 0; d < options.num_docs; ++d) {
      Rng rng = make_rng(options.seed, d);
      const auto k = draw_categorical(label_cdf, rng);
      Vector alpha = Vector::Constant(static_cast<Eigen::Index>(T), (1.0 - ideal.tau.focus) / static_cast<double>(T));
      const auto& g = model.groups[k];
      if (ideal.tau.spread) {
        for (auto t : g) alpha[static_cast<Eigen::Index>(t)] += ideal.tau.focus / static_cast<double>(g.size());
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
        alpha[static_cast<Eigen::Index>(g[pick(rng)])] += ideal.tau.focus;
      }
      alpha *= ideal.tau.concentration;
      const auto topic_cdf = cumulative(sample_dirichlet_params(alpha, rng));
      const auto n = draw_length(options, rng);
      std::vector<std::size_t> words(n);
      for (auto& w : words) w = draw_categorical(word_cdf[draw_categorical(topic_cdf, rng)], rng);
      docs[d] = make_document(words);
      docs[d].label = k;
    }
  }
  return Corpus(Vocabulary(synthetic_vocabulary(model.base_vocab, model.planted_anchors.size())), std::move(docs),
                default_labels(K, options.label_names));
}

Corpus generate_corpus(const Matrix& A, const Vector& tau, const CorpusGenOptions& options) {
  check_gen_options(options);
  check_stochastic_columns(A, "A");
  if (options.mode != GenerationMode::mixture) throw ValidationError("(A, tau) generation supports mixture mode only");
  if (tau.size() != A.cols() || (tau.array() <= 0.0).any())
    throw ValidationError("tau must hold one positive Dirichlet parameter per topic");
  const auto K = static_cast<std::size_t>(A.cols());
  std::vector<std::vector<double>> word_cdf(K);
  for (std::size_t k = 0; k < K; ++k) word_cdf[k] = cumulative(A.col(static_cast<Eigen::Index>(k)));
  std::vector<Document> docs(options.num_docs);
  for (std::size_t d = 0; d < options.num_docs; ++d) {
    Rng rng = make_rng(options.seed, d);
    const auto topic_cdf = cumulative(sample_dirichlet_params(tau, rng));
    const auto n = draw_length(options, rng);
    std::vector<std::size_t> words(n);
    for (auto& w : words) w = draw_categorical(word_cdf[draw_categorical(topic_cdf, rng)], rng);
    docs[d] = make_document(words);
  }
  return Corpus(Vocabulary(synthetic_vocabulary(static_cast<std::size_t>(A.rows()), 0)), std::move(docs));
}

Matrix induced_pair_matrix(const SubtopicModel& model, const IdealizedModel& ideal) {
  ideal.validate();
  const auto T = static_cast<Eigen::Index>(model.num_subtopics());
  const Vector pi = label_weights(ideal.R_M);
  const double a0 = ideal.tau.concentration;
  Matrix R = Matrix::Zero(T, T);
  for (std::size_t k = 0; k < model.groups.size(); ++k) {
    const auto& g = model.groups[k];
    const double gs = static_cast<double>(g.size());
    auto add = [&](const Vector& a, double weight) {
      Matrix m = a * a.transpose();
      m.diagonal() += a;
      R += weight * m / (a0 * (a0 + 1.0));
    };
    if (ideal.tau.spread) {
      Vector a = Vector::Constant(T, a0 * (1.0 - ideal.tau.focus) / static_cast<double>(T));
      for (auto t : g) a[static_cast<Eigen::Index>(t)] += a0 * ideal.tau.focus / gs;
      add(a, pi[static_cast<Eigen::Index>(k)]);
      continue;
    }
    for (auto focal : g) {
      Vector a = Vector::Constant(T, a0 * (1.0 - ideal.tau.focus) / static_cast<double>(T));
      a[static_cast<Eigen::Index>(focal)] += a0 * ideal.tau.focus;
      add(a, pi[static_cast<Eigen::Index>(k)] / gs);
    }
  }
  return R;
}

IdealizedModel random_ideal_model(std::size_t V, std::size_t K, double word_concentration, double core_weight,
                                  double rho, std::uint64_t seed) {
  if (K == 0 || V < K) throw ValidationError("need V >= K >= 1");
  if (!(core_weight >= 0.0 && core_weight <= 1.0) || !(rho >= 0.0 && rho <= 1.0))
    throw ValidationError("core_weight and rho must be in [0, 1]");
  IdealizedModel ideal;
  ideal.M.resize(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(K));
  const std::size_t block = V / K;
  for (std::size_t k = 0; k < K; ++k) {
    Vector base = Vector::Constant(static_cast<Eigen::Index>(V), (1.0 - core_weight) / static_cast<double>(V));
    for (std::size_t i = k * block; i < (k + 1) * block; ++i)
      base[static_cast<Eigen::Index>(i)] += core_weight / static_cast<double>(block);
    Rng rng = make_rng(seed, k);
    Vector col = sample_dirichlet(base, word_concentration, rng);
    // Keep full support so finite-concentration subtopics stay well defined.
    col = (col.array() + 1e-6).matrix();
    ideal.M.col(static_cast<Eigen::Index>(k)) = col / col.sum();
  }
  const Vector pi = Vector::Constant(static_cast<Eigen::Index>(K), 1.0 / static_cast<double>(K));
  ideal.R_M = (1.0 - rho) * pi * pi.transpose();
  ideal.R_M.diagonal() += rho * pi;
  return ideal;
}

}  // namespace itm
