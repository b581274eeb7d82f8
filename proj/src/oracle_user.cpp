#include "itm/oracle_user.hpp"

#include <algorithm>
#include <numeric>

#include "itm/error.hpp"

namespace itm {

namespace {

void require_labels(const Corpus& corpus) {
  if (!corpus.labeled()) throw ValidationError("oracle needs a corpus with a label on every document");
}

// counts[w][c]: occurrences of w in documents labeled c.
std::vector<std::vector<std::uint64_t>> category_counts(const Corpus& corpus, const std::vector<WordId>& words) {
  std::vector<std::ptrdiff_t> slot(corpus.vocab_size(), -1);
  for (std::size_t i = 0; i < words.size(); ++i) slot[words[i]] = static_cast<std::ptrdiff_t>(i);
  std::vector<std::vector<std::uint64_t>> counts(words.size(),
                                                 std::vector<std::uint64_t>(corpus.label_names().size(), 0));
  for (const auto& doc : corpus.documents())
    for (const auto& wc : doc.counts)
      if (slot[wc.word] >= 0) counts[static_cast<std::size_t>(slot[wc.word])][*doc.label] += wc.count;
  return counts;
}

}  // namespace

double g_score(const Corpus& corpus, WordId word, std::size_t category) {
  require_labels(corpus);
  if (word >= corpus.vocab_size()) throw ValidationError("word " + std::to_string(word) + " outside vocabulary");
  if (category >= corpus.label_names().size())
    throw ValidationError("category " + std::to_string(category) + " out of range");
  const auto counts = category_counts(corpus, {word})[0];
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw ValidationError("word '" + corpus.vocabulary().word(word) + "' does not occur in the corpus");
  return static_cast<double>(counts[category]) / static_cast<double>(total);
}

OracleResult oracle_groupings(const Corpus& corpus, const AnchorSet& anchors, const OracleConfig& config) {
  require_labels(corpus);
  if (config.per_category_count < 1) throw ValidationError("per_category_count must be >= 1");
  const auto C = corpus.label_names().size();
  const auto T = anchors.size();
  const auto counts = category_counts(corpus, anchors.indices);

  std::vector<std::uint64_t> total(T, 0);
  for (std::size_t p = 0; p < T; ++p) total[p] = std::accumulate(counts[p].begin(), counts[p].end(), std::uint64_t{0});
  auto g = [&](std::size_t p, std::size_t c) {
    return total[p] ? static_cast<double>(counts[p][c]) / static_cast<double>(total[p]) : 0.0;
  };
  // Higher g, then higher corpus frequency, then lower word index.
  auto before = [&](std::size_t c, std::size_t a, std::size_t b) {
    const double ga = g(a, c), gb = g(b, c);
    if (ga != gb) return ga > gb;
    if (total[a] != total[b]) return total[a] > total[b];
    return anchors.indices[a] < anchors.indices[b];
  };

  std::vector<std::vector<std::size_t>> lists(C);
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<std::size_t> eligible;
    for (std::size_t p = 0; p < T; ++p)
      if (total[p] > 0 && total[p] >= config.min_occurrences && counts[p][c] > 0) eligible.push_back(p);
    std::sort(eligible.begin(), eligible.end(), [&](auto a, auto b) { return before(c, a, b); });
    if (eligible.size() > config.per_category_count) eligible.resize(config.per_category_count);
    lists[c] = std::move(eligible);
  }

  // Resolve anchors claimed by several categories: keep the largest g, lower category on ties.
  std::vector<std::ptrdiff_t> owner(T, -1);
  for (std::size_t c = 0; c < C; ++c)
    for (auto p : lists[c])
      if (owner[p] < 0 || g(p, c) > g(p, static_cast<std::size_t>(owner[p]))) owner[p] = static_cast<std::ptrdiff_t>(c);

  OracleResult out;
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<std::size_t> group;
    for (auto p : lists[c])
      if (owner[p] == static_cast<std::ptrdiff_t>(c)) group.push_back(p);
    if (group.empty()) {
      out.warnings.push_back("category '" + corpus.label_names()[c] + "' has no eligible anchors; group omitted");
      continue;
    }
    out.feedback.groups.push_back(std::move(group));
    out.feedback.names.push_back(corpus.label_names()[c]);
    out.categories.push_back(c);
  }
  return out;
}

}  // namespace itm
