#include "itm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "itm/error.hpp"
#include "itm/kernels.hpp"
#include "itm/rng.hpp"

namespace itm {

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_vocab(const TopicMatrix& topics, const Corpus& corpus) {
  if (static_cast<std::size_t>(topics.num_words()) != corpus.vocab_size())
    throw ValidationError("topic matrix has " + std::to_string(topics.num_words()) + " words but corpus vocabulary has " +
                          std::to_string(corpus.vocab_size()));
  if (topics.num_topics() == 0) throw ValidationError("topic matrix has no topics");
}

}  // namespace

std::vector<WordId> top_words(const Matrix& A, Eigen::Index topic, std::size_t n) {
  std::vector<WordId> order(static_cast<std::size_t>(A.rows()));
  std::iota(order.begin(), order.end(), WordId{0});
  n = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(), [&](WordId a, WordId b) {
    const double pa = A(static_cast<Eigen::Index>(a), topic), pb = A(static_cast<Eigen::Index>(b), topic);
    return pa != pb ? pa > pb : a < b;
  });
  order.resize(n);
  return order;
}

TopicScores coherence(const TopicMatrix& topics, const Corpus& corpus, std::size_t n, double epsilon) {
  if (n < 2) throw ValidationError("coherence needs n >= 2");
  check_vocab(topics, corpus);
  std::vector<std::vector<WordId>> tops;
  std::set<WordId> needed;
  for (Eigen::Index k = 0; k < topics.num_topics(); ++k) {
    tops.push_back(top_words(topics.A, k, n));
    needed.insert(tops.back().begin(), tops.back().end());
  }
  // Sorted posting lists of the documents containing each needed word.
  std::map<WordId, std::vector<std::size_t>> postings;
  for (auto w : needed) postings[w];
  for (std::size_t d = 0; d < corpus.num_documents(); ++d)
    for (const auto& wc : corpus.documents()[d].counts)
      if (auto it = postings.find(wc.word); it != postings.end()) it->second.push_back(d);
  auto co = [&](WordId a, WordId b) {
    const auto& pa = postings[a];
    const auto& pb = postings[b];
    std::size_t i = 0, j = 0, c = 0;
    while (i < pa.size() && j < pb.size()) {
      if (pa[i] < pb[j]) ++i;
      else if (pb[j] < pa[i]) ++j;
      else { ++c; ++i; ++j; }
    }
    return static_cast<double>(c);
  };

  TopicScores out;
  for (const auto& top : tops) {
    double score = 0.0;
    for (std::size_t i = 1; i < top.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const double dj = static_cast<double>(postings[top[j]].size());
        if (dj == 0.0)
          throw ValidationError("top word '" + corpus.vocabulary().word(top[j]) + "' occurs in no document");
        score += std::log((co(top[i], top[j]) + epsilon) / dj);
      }
    out.per_topic.push_back(score);
  }
  out.mean = mean_of(out.per_topic);
  return out;
}

TopicScores topic_entropy(const TopicMatrix& topics) {
  TopicScores out;
  for (Eigen::Index k = 0; k < topics.num_topics(); ++k) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < topics.num_words(); ++i) {
      const double p = topics.A(i, k);
      if (p > 0.0) h -= p * std::log(p);
    }
    out.per_topic.push_back(std::max(0.0, h));
  }
  out.mean = mean_of(out.per_topic);
  return out;
}

double unique_top_words(const TopicMatrix& topics, std::size_t n) {
  if (n < 1) throw ValidationError("unique_top_words needs n >= 1");
  std::map<WordId, std::size_t> lists_containing;
  std::size_t slots = 0;
  for (Eigen::Index k = 0; k < topics.num_topics(); ++k) {
    const auto top = top_words(topics.A, k, n);
    slots += top.size();
    for (auto w : top) ++lists_containing[w];
  }
  std::size_t unique = 0;
  for (const auto& [w, c] : lists_containing) unique += c == 1;
  return slots ? static_cast<double>(unique) / static_cast<double>(slots) : 0.0;
}

DocTopics infer_doc_topics(const TopicMatrix& topics, const Corpus& corpus, const GibbsOptions& options,
                           std::span<const std::size_t> docs) {
  check_vocab(topics, corpus);
  if (options.iterations < 1) throw ValidationError("Gibbs iterations must be >= 1");
  if (!(options.alpha > 0.0)) throw ValidationError("alpha must be positive");
  DocTopics out;
  if (docs.empty()) {
    out.docs.resize(corpus.num_documents());
    std::iota(out.docs.begin(), out.docs.end(), std::size_t{0});
  } else {
    out.docs.assign(docs.begin(), docs.end());
    for (auto d : out.docs)
      if (d >= corpus.num_documents()) throw ValidationError("document index " + std::to_string(d) + " out of range");
  }
  auto r = kernels::parallel::gibbs_fixed_topics(topics.A, corpus, out.docs, options.alpha, options.iterations,
                                                 options.seed);
  out.theta = std::move(r.theta);
  out.flagged = std::move(r.empty);
  return out;
}

LoglikResult loglik_per_token(const TopicMatrix& topics, const Corpus& corpus, const GibbsOptions& options) {
  const auto dt = infer_doc_topics(topics, corpus, options);
  LoglikResult out;
  double total = 0.0;
  for (std::size_t r = 0; r < dt.docs.size(); ++r) {
    const auto theta = dt.theta.row(static_cast<Eigen::Index>(r));
    for (const auto& wc : corpus.documents()[dt.docs[r]].counts) {
      double p = theta.dot(topics.A.row(static_cast<Eigen::Index>(wc.word)));
      if (!(p > 0.0)) {
        p = kLogProbabilityFloor;
        out.floored_tokens += wc.count;
      }
      total += wc.count * std::log(p);
      out.tokens += wc.count;
    }
  }
  if (out.tokens == 0) throw ValidationError("corpus has no tokens");
  out.per_token = total / static_cast<double>(out.tokens);
  return out;
}

Distance parse_distance(std::string_view tag) {
  if (tag == "tv" || tag == "total_variation") return Distance::total_variation;
  if (tag == "euclidean" || tag == "l2") return Distance::euclidean;
  throw ValidationError("unknown distance '" + std::string(tag) + "' (expected tv or euclidean)");
}

double knn_loocv(const RowMatrix& points, std::span<const std::size_t> labels, int k, Distance distance) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw ValidationError("LOOCV needs at least 2 points");
  if (k < 1) throw ValidationError("k must be >= 1");
  if (n < static_cast<std::size_t>(k) + 1)
    throw ValidationError("LOOCV with k=" + std::to_string(k) + " needs at least " + std::to_string(k + 1) + " points");
  if (labels.size() != n) throw ValidationError("labels and points differ in length");
  const auto pred = kernels::parallel::knn_predict(points, labels, {k, distance == Distance::euclidean});
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += pred[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(n);
}

IntrusionSet make_intrusion_items(const TopicMatrix& topics, const Vocabulary& vocab, std::size_t n,
                                  std::uint64_t seed) {
  const auto K = static_cast<std::size_t>(topics.num_topics());
  if (K < 2) throw ValidationError("word intrusion needs at least 2 topics");
  if (n < 2) throw ValidationError("word intrusion needs n >= 2");
  if (vocab.size() != static_cast<std::size_t>(topics.num_words()))
    throw ValidationError("vocabulary does not match topic matrix");
  std::vector<std::vector<WordId>> tops(K);
  for (std::size_t k = 0; k < K; ++k) tops[k] = top_words(topics.A, static_cast<Eigen::Index>(k), n);

  IntrusionSet out;
  for (std::size_t k = 0; k < K; ++k) {
    const std::set<WordId> own(tops[k].begin(), tops[k].end());
    std::set<WordId> pool;
    for (std::size_t o = 0; o < K; ++o)
      if (o != k)
        for (auto w : tops[o])
          if (!own.count(w)) pool.insert(w);
    if (pool.empty()) {
      out.warnings.push_back("topic " + std::to_string(k) + ": no eligible intruder");
      continue;
    }
    Rng rng = make_rng(seed, k);
    std::vector<WordId> candidates(pool.begin(), pool.end());
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const WordId intruder = candidates[pick(rng)];

    IntrusionItem item;
    item.topic_id = k;
    for (std::size_t o = 0; o < K; ++o)
      if (o != k && std::find(tops[o].begin(), tops[o].end(), intruder) != tops[o].end()) {
        item.source_topic = o;
        break;
      }
    item.shown = tops[k];
    item.shown.push_back(intruder);
    std::shuffle(item.shown.begin(), item.shown.end(), rng);
    item.intruder_position =
        static_cast<std::size_t>(std::find(item.shown.begin(), item.shown.end(), intruder) - item.shown.begin());
    for (auto w : item.shown) item.shown_words.push_back(vocab.word(w));
    out.items.push_back(std::move(item));
  }
  return out;
}

MetricsReport evaluate_model(const TopicMatrix& topics, const Corpus& corpus, const EvaluationOptions& options) {
  MetricsReport r;
  r.params = options;
  const auto ll = loglik_per_token(topics, corpus, options.gibbs);
  r.loglik_per_token = ll.per_token;
  r.floored_tokens = ll.floored_tokens;
  r.coherence = coherence(topics, corpus, options.top_n, options.epsilon);
  r.coherence_mean = r.coherence.mean;
  r.pct_unique_top_words = unique_top_words(topics, options.top_n);
  r.entropy = topic_entropy(topics);
  r.avg_topic_entropy = r.entropy.mean;
  return r;
}

}  // namespace itm
