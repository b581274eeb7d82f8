#pragma once

#include <string>
#include <vector>

#include "itm/anchors.hpp"
#include "itm/corpus.hpp"
#include "itm/recovery.hpp"

namespace itm {

struct OracleConfig {
  std::size_t per_category_count = 10;
  std::size_t min_occurrences = 0;  // anchors seen fewer times in the corpus are ineligible
};

/// Occurrences of `word` in documents labeled `category` over its total occurrences.
double g_score(const Corpus& corpus, WordId word, std::size_t category);

struct OracleResult {
  GroupingFeedback feedback;          // one named group per category that kept at least one anchor
  std::vector<std::size_t> categories;  // label index of each group
  std::vector<std::string> warnings;
};

/// Simulated user: for each category, the top anchors by g(a, c); an anchor in
/// several lists stays only with the category where its g is largest.
OracleResult oracle_groupings(const Corpus& corpus, const AnchorSet& anchors, const OracleConfig& config = {});

}  // namespace itm
