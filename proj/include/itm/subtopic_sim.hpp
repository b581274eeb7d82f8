#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/linalg.hpp"

namespace itm {

/// Per-document prior used when generating mixture corpora: each document picks
/// a label k, then one focal subtopic t* in G_k, and draws its subtopic
/// proportions from Dirichlet(concentration * (focus * e_{t*} + (1 - focus) * uniform)).
/// With `spread`, the focus mass is shared evenly by all of G_k instead.
struct DocumentPrior {
  double focus = 0.8;
  double concentration = 1.0;
  bool spread = false;
};

/// The interpretable model a user has in mind: K ideal topics and their
/// topic-topic co-occurrence.
struct IdealizedModel {
  Matrix M;    // V x K, column-stochastic
  Matrix R_M;  // K x K, symmetric, nonnegative, unit mass
  DocumentPrior tau;

  void validate() const;
};

/// How the ideal R_M mass of a block (k, k') is split over subtopic pairs.
enum class PairSplit {
  /// Within a group all mass sits on the diagonal (a document uses one
  /// subtopic per ideal topic); cross-group blocks are split uniformly.
  within_group_diagonal,
  /// Every block is split uniformly over G_k x G_k'.
  uniform,
};

struct SubtopicOptions {
  std::vector<std::size_t> group_sizes;  // |G_k| per ideal topic
  double concentration = 100.0;          // Dirichlet concentration; +inf gives A_t = M_k
  bool plant_anchors = false;
  double anchor_mass = 0.05;  // mass moved onto each planted anchor word
  PairSplit split = PairSplit::within_group_diagonal;
  std::uint64_t seed = 1;
};

inline constexpr double kInfiniteConcentration = std::numeric_limits<double>::infinity();

struct SubtopicModel {
  Matrix A;    // V' x T_sub; V' = V + T_sub when anchors are planted
  Matrix R_A;  // T_sub x T_sub
  std::vector<std::vector<std::size_t>> groups;  // subtopic indices per ideal topic
  std::vector<WordId> planted_anchors;           // per subtopic, empty if none
  std::size_t base_vocab = 0;                    // V of the idealized model
  double anchor_mass = 0.0;

  std::size_t num_subtopics() const noexcept { return static_cast<std::size_t>(A.cols()); }
  /// Ideal topic of each subtopic.
  std::vector<std::size_t> group_of() const;
  /// Expected group mean of the subtopic columns over A's vocabulary: M_k
  /// (scaled by 1 - anchor_mass when anchors are planted) plus the group's
  /// share of planted-anchor mass. This is the target of interactive recovery.
  Matrix effective_ideal(const IdealizedModel& ideal) const;
};

SubtopicModel sample_subtopics(const IdealizedModel& ideal, const SubtopicOptions& options);

/// R_A built from R_M by the chosen split; satisfies the group-sum identity exactly.
Matrix split_pair_matrix(const Matrix& R_M, const std::vector<std::size_t>& group_sizes, PairSplit split);

/// Exact covariance of a subtopic column drawn for ideal topic k:
/// (diag(M_k) - M_k M_k^T) / (concentration + 1).
Matrix subtopic_covariance(const Vector& mean, double concentration);

/// sum_k R_M(k, k) Sigma^(k): the bias of E_A[Q^A] away from Q^M.
Matrix subtopic_bias(const IdealizedModel& ideal, const SubtopicOptions& options);

/// Q^M + sum_k w_k Sigma^(k), w_k = sum_{t in G_k} R_A(t, t): E_A[Q^A] for either split.
/// Equals Q^M + subtopic_bias for PairSplit::within_group_diagonal.
Matrix expected_subtopic_cooccurrence(const IdealizedModel& ideal, const SubtopicOptions& options);

enum class GenerationMode {
  exact_pairs,  // doc_length 2; the subtopic pair is drawn from R_A directly
  mixture,      // DocumentPrior per document
};

struct CorpusGenOptions {
  std::size_t num_docs = 1000;
  std::size_t doc_length = 50;
  bool poisson_length = false;  // length ~ max(2, Poisson(doc_length))
  GenerationMode mode = GenerationMode::mixture;
  std::uint64_t seed = 1;
  std::vector<std::string> label_names;  // one per ideal topic; defaults to topicK
};

/// Documents from the subtopic model, labeled by the ideal topic they came from.
/// Vocabulary tokens are w0000.. for base words and anchorNNN for planted anchors.
Corpus generate_corpus(const SubtopicModel& model, const IdealizedModel& ideal, const CorpusGenOptions& options);

/// Unlabeled documents from topics A with document proportions ~ Dirichlet(tau).
Corpus generate_corpus(const Matrix& A, const Vector& tau, const CorpusGenOptions& options);

/// E[p p^T] for the mixture prior: the R_A a mixture corpus realizes.
Matrix induced_pair_matrix(const SubtopicModel& model, const IdealizedModel& ideal);

/// Random ideal model: each topic emphasizes its own block of V/K words with
/// weight `core_weight`; R_M = rho * diag(pi) + (1 - rho) * pi pi^T, uniform pi.
IdealizedModel random_ideal_model(std::size_t V, std::size_t K, double word_concentration, double core_weight,
                                  double rho, std::uint64_t seed);

/// Tokens used by generated corpora.
std::vector<std::string> synthetic_vocabulary(std::size_t base_vocab, std::size_t planted);

}  // namespace itm
