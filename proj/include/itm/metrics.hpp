#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itm/corpus.hpp"
#include "itm/linalg.hpp"
#include "itm/recovery.hpp"

namespace itm {

struct TopicScores {
  std::vector<double> per_topic;
  double mean = 0.0;
};

/// The n most probable words of topic k, most probable first; ties go to the lower word id.
std::vector<WordId> top_words(const Matrix& A, Eigen::Index topic, std::size_t n);

/// UMass document co-occurrence coherence over the top-n words of each topic:
///   sum_{i=2..n} sum_{j<i} log((D(w_i, w_j) + epsilon) / D(w_j)),
/// D being document (co-)frequencies in `corpus`.
TopicScores coherence(const TopicMatrix& topics, const Corpus& corpus, std::size_t n = 10, double epsilon = 1.0);

/// Shannon entropy (nats) of every topic column.
TopicScores topic_entropy(const TopicMatrix& topics);

/// Fraction of the K * n top-word slots holding a word that is in exactly one topic's list.
double unique_top_words(const TopicMatrix& topics, std::size_t n = 10);

struct GibbsOptions {
  double alpha = 0.1;
  int iterations = 100;  // the second half is averaged
  std::uint64_t seed = 1;
};

struct DocTopics {
  RowMatrix theta;                // one row per requested document, in the simplex
  std::vector<bool> flagged;      // no usable token: uniform row
  std::vector<std::size_t> docs;  // corpus index of each row
};

/// Collapsed Gibbs sampling of token assignments with the topics held fixed.
/// `docs` selects documents (all when empty).
DocTopics infer_doc_topics(const TopicMatrix& topics, const Corpus& corpus, const GibbsOptions& options,
                           std::span<const std::size_t> docs = {});

struct LoglikResult {
  double per_token = 0.0;
  std::uint64_t tokens = 0;
  std::uint64_t floored_tokens = 0;  // probability 0 under every topic; log(1e-12) used
};

inline constexpr double kLogProbabilityFloor = 1e-12;

/// Mean over tokens of log sum_k theta(d, k) A(w, k), theta from infer_doc_topics.
LoglikResult loglik_per_token(const TopicMatrix& topics, const Corpus& corpus, const GibbsOptions& options = {});

enum class Distance { total_variation, euclidean };

Distance parse_distance(std::string_view tag);

/// Leave-one-out k-NN accuracy. Votes tie-break on smaller summed neighbor
/// distance, then lower label; equal distances keep input order.
double knn_loocv(const RowMatrix& points, std::span<const std::size_t> labels, int k,
                 Distance distance = Distance::total_variation);

struct IntrusionItem {
  std::size_t topic_id = 0;
  std::vector<WordId> shown;             // n + 1 word ids in display order
  std::vector<std::string> shown_words;  // same words as tokens
  std::size_t intruder_position = 0;     // answer key
  std::size_t source_topic = 0;          // lowest other topic whose top-n list holds the intruder
};

struct IntrusionSet {
  std::vector<IntrusionItem> items;
  std::vector<std::string> warnings;
};

/// One word-intrusion item per topic; topics without any eligible intruder are skipped with a warning.
IntrusionSet make_intrusion_items(const TopicMatrix& topics, const Vocabulary& vocab, std::size_t n,
                                  std::uint64_t seed);

struct EvaluationOptions {
  std::size_t top_n = 10;
  double epsilon = 1.0;
  GibbsOptions gibbs;
};

struct MetricsReport {
  double loglik_per_token = 0.0;
  double coherence_mean = 0.0;
  double pct_unique_top_words = 0.0;
  double avg_topic_entropy = 0.0;
  std::uint64_t floored_tokens = 0;
  EvaluationOptions params;
  TopicScores coherence;
  TopicScores entropy;
};

MetricsReport evaluate_model(const TopicMatrix& topics, const Corpus& corpus, const EvaluationOptions& options = {});

}  // namespace itm
