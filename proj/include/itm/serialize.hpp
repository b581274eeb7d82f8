#pragma once

// JSON documents exchanged by the CLI, the service and the web UI.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "itm/anchors.hpp"
#include "itm/corpus.hpp"
#include "itm/metrics.hpp"
#include "itm/oracle_user.hpp"
#include "itm/recovery.hpp"
#include "itm/subtopic_sim.hpp"

namespace itm {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const Json& j);

/// {"words": [...], "indices": [...], "residuals": [...], "params": {...}}
Json anchors_to_json(const AnchorSet& anchors, const Vocabulary& vocab);
AnchorSet anchors_from_json(const Json& j);

/// {"groups": [{"name": str, "anchors": [positions], "words": [tokens]}]}.
/// `anchors` / `vocab` may be null, in which case "words" is omitted.
Json feedback_to_json(const GroupingFeedback& feedback, const AnchorSet* anchors = nullptr,
                      const Vocabulary* vocab = nullptr);
GroupingFeedback feedback_from_json(const Json& j);

/// {"num_words", "num_topics", "topics": [{"name", "top_words": [{"word", "prob"}]}], "columns"?}.
/// Full columns are included when `full` is set; only those round-trip.
Json topics_to_json(const TopicMatrix& topics, const Vocabulary& vocab, std::size_t top_n = 10, bool full = true);
TopicMatrix topics_from_json(const Json& j);

// Binary matrix cache: 8-byte magic "ITMAv1\0\0", uint64 rows, uint64 cols, row-major float64 LE.
void write_topic_cache(const TopicMatrix& topics, const std::filesystem::path& path);
TopicMatrix read_topic_cache(const std::filesystem::path& path);

Json metrics_to_json(const MetricsReport& report);

/// Items without answers, and the answer key, as separate documents.
Json intrusion_items_to_json(const IntrusionSet& set);
Json intrusion_key_to_json(const IntrusionSet& set);

Json ideal_model_to_json(const IdealizedModel& ideal);
IdealizedModel ideal_model_from_json(const Json& j);
Json subtopic_model_to_json(const SubtopicModel& model);
SubtopicModel subtopic_model_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline, written via a temporary file and rename.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace itm
