#pragma once

// Interactive grouping session: an event-sourced draft of anchor groups plus
// the most recent recovered model and intrusion answers.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "itm/anchors.hpp"
#include "itm/metrics.hpp"
#include "itm/recovery.hpp"
#include "itm/serialize.hpp"

namespace itm {

struct SessionGroup {
  std::uint64_t id = 0;
  std::string name;
  std::vector<std::size_t> anchors;  // positions into the session's anchor list, insertion order

  bool operator==(const SessionGroup&) const = default;
};

/// Current groups. Disjoint by construction: every edit is checked before it
/// is applied.
struct GroupState {
  std::vector<SessionGroup> groups;
  std::uint64_t next_id = 1;

  const SessionGroup* find(std::uint64_t id) const;
  /// Group holding anchor position `p`, if any.
  const SessionGroup* owner(std::size_t p) const;
  GroupingFeedback to_feedback() const;

  bool operator==(const GroupState&) const = default;
};

enum class EditOp { create, add_word, remove_word, merge_groups, delete_group, rename, replace };

struct GroupEdit {
  EditOp op = EditOp::create;
  std::uint64_t group = 0;             // add_word, remove_word, delete_group, rename
  std::vector<std::uint64_t> groups;   // merge_groups; the first id survives
  std::vector<std::size_t> anchors;    // create: members; add_word / remove_word: exactly one
  std::string name;                    // create (optional), rename
  GroupingFeedback replacement;        // replace

  bool operator==(const GroupEdit&) const = default;
};

/// Applies `edit` to a copy of `state` and returns it; `state` is untouched when
/// this throws. Removing the last anchor of a group deletes the group.
/// Errors: ConflictError when an anchor already belongs to another group (the
/// error names that group), ValidationError for empty creations, unknown
/// groups or out-of-range positions.
GroupState apply_edit(const GroupState& state, const GroupEdit& edit, std::size_t num_anchors);

/// Resolves an anchor token to its position; used when an edit names words.
using AnchorResolver = std::function<std::size_t(const std::string&)>;

/// Edit JSON: {"op": "create", "name"?, "anchors": [...]}, {"op": "add_word",
/// "group", "anchor"}, {"op": "remove_word", "group", "anchor"},
/// {"op": "merge_groups", "groups": [...]}, {"op": "delete_group", "group"},
/// {"op": "rename", "group", "name"}, {"op": "replace", "feedback": {...}}.
/// Anchors may be given as positions or, with a resolver, as words.
GroupEdit edit_from_json(const Json& j, const AnchorResolver& resolve = {});
Json edit_to_json(const GroupEdit& edit);

enum class SessionStatus { editing, recovered };

/// One entry of the append-only history. `event` is {"type": "edit", "edit": {...}},
/// {"type": "recover", "mode": ...} or {"type": "answer", "item", "position", "correct"}.
struct HistoryEvent {
  std::uint64_t seq = 0;
  std::string time;  // UTC, ISO 8601
  Json event;
};

struct IntrusionAnswer {
  std::size_t item = 0;
  std::size_t position = 0;
  bool correct = false;
  std::string time;
};

struct SessionState {
  std::string id;
  std::string corpus_name;
  std::string corpus_ref;  // corpus content hash, hex
  AnchorSet anchors;
  std::vector<std::string> anchor_words;
  GroupState groups;
  SessionStatus status = SessionStatus::editing;
  std::optional<TopicMatrix> model;
  std::string model_mode;  // full or partial
  Json metrics;
  std::optional<IntrusionSet> intrusion;
  std::map<std::size_t, IntrusionAnswer> answers;  // latest answer per item
  std::vector<HistoryEvent> history;
  std::uint64_t version = 0;  // bumped by every state change
};

std::string utc_timestamp();

/// Applies a group edit and logs it. The model and intrusion items are dropped,
/// so a recovered status always matches the current groups.
void record_edit(SessionState& state, const GroupEdit& edit);
/// Stores a model recovered from the current groups and logs the run.
void record_recovery(SessionState& state, TopicMatrix model, std::string mode, Json metrics, IntrusionSet intrusion);
/// Scores and stores one intrusion answer, overwriting any earlier answer for the item.
const IntrusionAnswer& record_answer(SessionState& state, std::size_t item, std::size_t position);

/// Rebuilds the groups from the edit events of a history log, starting empty.
GroupState replay_groups(const std::vector<HistoryEvent>& history, std::size_t num_anchors);

Json groups_to_json(const GroupState& groups, const std::vector<std::string>& anchor_words, std::uint64_t version);

/// Whole session, including the model columns, as persisted on disk.
Json session_to_json(const SessionState& state);
SessionState session_from_json(const Json& j);

const char* status_name(SessionStatus s);

}  // namespace itm
