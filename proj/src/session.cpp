#include "itm/session.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>

#include "itm/error.hpp"

namespace itm {

const SessionGroup* GroupState::find(std::uint64_t id) const {
  for (const auto& g : groups)
    if (g.id == id) return &g;
  return nullptr;
}

const SessionGroup* GroupState::owner(std::size_t p) const {
  for (const auto& g : groups)
    if (std::find(g.anchors.begin(), g.anchors.end(), p) != g.anchors.end()) return &g;
  return nullptr;
}

GroupingFeedback GroupState::to_feedback() const {
  GroupingFeedback f;
  for (const auto& g : groups) {
    f.groups.push_back(g.anchors);
    f.names.push_back(g.name);
  }
  return f;
}

namespace {

SessionGroup& find_mut(GroupState& s, std::uint64_t id) {
  for (auto& g : s.groups)
    if (g.id == id) return g;
  throw ValidationError("no group with id " + std::to_string(id));
}

void check_position(std::size_t p, std::size_t num_anchors) {
  if (p >= num_anchors)
    throw ValidationError("anchor position " + std::to_string(p) + " out of range (" + std::to_string(num_anchors) +
                          " anchors)");
}

void check_free(const GroupState& s, std::size_t p) {
  if (const auto* g = s.owner(p))
    throw ConflictError("anchor " + std::to_string(p) + " already belongs to group '" + g->name + "'", g->name);
}

const char* op_name(EditOp op) {
  switch (op) {
    case EditOp::create: return "create";
    case EditOp::add_word: return "add_word";
    case EditOp::remove_word: return "remove_word";
    case EditOp::merge_groups: return "merge_groups";
    case EditOp::delete_group: return "delete_group";
    case EditOp::rename: return "rename";
    case EditOp::replace: return "replace";
  }
  return "?";
}

EditOp parse_op(const std::string& s) {
  for (auto op : {EditOp::create, EditOp::add_word, EditOp::remove_word, EditOp::merge_groups, EditOp::delete_group,
                  EditOp::rename, EditOp::replace})
    if (s == op_name(op)) return op;
  throw ValidationError("unknown edit op '" + s + "'");
}

}  // namespace

GroupState apply_edit(const GroupState& state, const GroupEdit& edit, std::size_t num_anchors) {
  GroupState s = state;
  switch (edit.op) {
    case EditOp::create: {
      if (edit.anchors.empty()) throw ValidationError("cannot create an empty group");
      std::set<std::size_t> seen;
      for (auto p : edit.anchors) {
        check_position(p, num_anchors);
        if (!seen.insert(p).second) throw ValidationError("anchor " + std::to_string(p) + " listed twice");
        check_free(s, p);
      }
      const auto id = s.next_id++;
      s.groups.push_back({id, edit.name.empty() ? "group" + std::to_string(id) : edit.name, edit.anchors});
      break;
    }
    case EditOp::add_word: {
      if (edit.anchors.size() != 1) throw ValidationError("add_word takes exactly one anchor");
      const auto p = edit.anchors[0];
      check_position(p, num_anchors);
      auto& g = find_mut(s, edit.group);
      if (std::find(g.anchors.begin(), g.anchors.end(), p) != g.anchors.end())
        throw ValidationError("anchor " + std::to_string(p) + " is already in group '" + g.name + "'");
      check_free(s, p);
      g.anchors.push_back(p);
      break;
    }
    case EditOp::remove_word: {
      if (edit.anchors.size() != 1) throw ValidationError("remove_word takes exactly one anchor");
      auto& g = find_mut(s, edit.group);
      auto it = std::find(g.anchors.begin(), g.anchors.end(), edit.anchors[0]);
      if (it == g.anchors.end())
        throw ValidationError("anchor " + std::to_string(edit.anchors[0]) + " is not in group '" + g.name + "'");
      g.anchors.erase(it);
      if (g.anchors.empty())
        std::erase_if(s.groups, [&](const SessionGroup& x) { return x.id == edit.group; });
      break;
    }
    case EditOp::merge_groups: {
      if (edit.groups.size() < 2) throw ValidationError("merge_groups needs at least two groups");
      std::set<std::uint64_t> ids(edit.groups.begin(), edit.groups.end());
      if (ids.size() != edit.groups.size()) throw ValidationError("merge_groups lists a group twice");
      for (auto id : edit.groups) find_mut(s, id);
      auto& target = find_mut(s, edit.groups[0]);
      for (std::size_t i = 1; i < edit.groups.size(); ++i) {
        const auto& src = *s.find(edit.groups[i]);
        target.anchors.insert(target.anchors.end(), src.anchors.begin(), src.anchors.end());
      }
      std::erase_if(s.groups, [&](const SessionGroup& g) { return g.id != edit.groups[0] && ids.count(g.id); });
      break;
    }
    case EditOp::delete_group: {
      find_mut(s, edit.group);
      std::erase_if(s.groups, [&](const SessionGroup& g) { return g.id == edit.group; });
      break;
    }
    case EditOp::rename: {
      if (edit.name.empty()) throw ValidationError("group name must not be empty");
      find_mut(s, edit.group).name = edit.name;
      break;
    }
    case EditOp::replace: {
      validate_feedback(edit.replacement, num_anchors);
      const auto& f = edit.replacement;
      s.groups.clear();
      for (std::size_t g = 0; g < f.groups.size(); ++g) {
        const auto id = s.next_id++;
        const std::string name = g < f.names.size() && !f.names[g].empty() ? f.names[g] : "group" + std::to_string(id);
        s.groups.push_back({id, name, f.groups[g]});
      }
      break;
    }
  }
  return s;
}

GroupEdit edit_from_json(const Json& j, const AnchorResolver& resolve) {
  auto anchor = [&](const Json& a) -> std::size_t {
    if (a.is_string()) {
      if (!resolve) throw ValidationError("anchor words need a resolver; give positions instead");
      return resolve(a.get<std::string>());
    }
    if (!a.is_number_unsigned()) throw ValidationError("anchor must be a position or a word");
    return a.get<std::size_t>();
  };
  try {
    if (!j.is_object()) throw ValidationError("edit must be a JSON object");
    GroupEdit e;
    e.op = parse_op(j.at("op").get<std::string>());
    switch (e.op) {
      case EditOp::create:
        e.name = j.value("name", "");
        for (const auto& a : j.at("anchors")) e.anchors.push_back(anchor(a));
        break;
      case EditOp::add_word:
      case EditOp::remove_word:
        e.group = j.at("group").get<std::uint64_t>();
        e.anchors.push_back(anchor(j.at("anchor")));
        break;
      case EditOp::merge_groups:
        e.groups = j.at("groups").get<std::vector<std::uint64_t>>();
        break;
      case EditOp::delete_group:
        e.group = j.at("group").get<std::uint64_t>();
        break;
      case EditOp::rename:
        e.group = j.at("group").get<std::uint64_t>();
        e.name = j.at("name").get<std::string>();
        break;
      case EditOp::replace: {
        const auto& f = j.at("feedback");
        for (const auto& g : f.at("groups")) {
          std::vector<std::size_t> members;
          if (g.contains("anchors"))
            for (const auto& a : g["anchors"]) members.push_back(anchor(a));
          else
            for (const auto& a : g.at("words")) members.push_back(anchor(a));
          e.replacement.groups.push_back(std::move(members));
          e.replacement.names.push_back(g.value("name", ""));
        }
        break;
      }
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("invalid edit: ") + ex.what());
  }
}

Json edit_to_json(const GroupEdit& e) {
  Json j{{"op", op_name(e.op)}};
  switch (e.op) {
    case EditOp::create:
      j["name"] = e.name;
      j["anchors"] = e.anchors;
      break;
    case EditOp::add_word:
    case EditOp::remove_word:
      j["group"] = e.group;
      j["anchor"] = e.anchors.empty() ? 0 : e.anchors[0];
      break;
    case EditOp::merge_groups: j["groups"] = e.groups; break;
    case EditOp::delete_group: j["group"] = e.group; break;
    case EditOp::rename:
      j["group"] = e.group;
      j["name"] = e.name;
      break;
    case EditOp::replace: j["feedback"] = feedback_to_json(e.replacement); break;
  }
  return j;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

namespace {

void log_event(SessionState& state, Json event) {
  const std::uint64_t seq = state.history.empty() ? 1 : state.history.back().seq + 1;
  state.history.push_back({seq, utc_timestamp(), std::move(event)});
  ++state.version;
}

}  // namespace

void record_edit(SessionState& state, const GroupEdit& edit) {
  state.groups = apply_edit(state.groups, edit, state.anchors.indices.size());
  state.status = SessionStatus::editing;
  state.model.reset();
  state.model_mode.clear();
  state.metrics = Json();
  state.intrusion.reset();
  state.answers.clear();
  log_event(state, Json{{"type", "edit"}, {"edit", edit_to_json(edit)}});
}

void record_recovery(SessionState& state, TopicMatrix model, std::string mode, Json metrics, IntrusionSet intrusion) {
  state.model = std::move(model);
  state.model_mode = mode;
  state.metrics = std::move(metrics);
  state.intrusion = std::move(intrusion);
  state.answers.clear();
  state.status = SessionStatus::recovered;
  log_event(state, Json{{"type", "recover"}, {"mode", mode}});
}

const IntrusionAnswer& record_answer(SessionState& state, std::size_t item, std::size_t position) {
  if (state.status != SessionStatus::recovered || !state.intrusion)
    throw ValidationError("session has no recovered model to evaluate");
  if (item >= state.intrusion->items.size()) throw ValidationError("no intrusion item " + std::to_string(item));
  const auto& it = state.intrusion->items[item];
  if (position >= it.shown.size())
    throw ValidationError("position " + std::to_string(position) + " out of range for item " + std::to_string(item));
  IntrusionAnswer a{item, position, position == it.intruder_position, utc_timestamp()};
  state.answers[item] = a;
  log_event(state, Json{{"type", "answer"}, {"item", item}, {"position", position}, {"correct", a.correct}});
  return state.answers[item];
}

GroupState replay_groups(const std::vector<HistoryEvent>& history, std::size_t num_anchors) {
  GroupState s;
  for (const auto& h : history)
    if (h.event.value("type", "") == "edit") s = apply_edit(s, edit_from_json(h.event.at("edit")), num_anchors);
  return s;
}

Json groups_to_json(const GroupState& groups, const std::vector<std::string>& anchor_words, std::uint64_t version) {
  Json list = Json::array();
  for (const auto& g : groups.groups) {
    Json words = Json::array();
    for (auto p : g.anchors) words.push_back(p < anchor_words.size() ? anchor_words[p] : "");
    list.push_back({{"id", g.id}, {"name", g.name}, {"anchors", g.anchors}, {"words", std::move(words)}});
  }
  return Json{{"version", version}, {"groups", std::move(list)}};
}

const char* status_name(SessionStatus s) { return s == SessionStatus::recovered ? "recovered" : "editing"; }

namespace {

Json intrusion_state_to_json(const IntrusionSet& set) {
  Json items = Json::array();
  for (const auto& it : set.items)
    items.push_back({{"topic_id", it.topic_id},
                     {"shown", it.shown},
                     {"shown_words", it.shown_words},
                     {"intruder_position", it.intruder_position},
                     {"source_topic", it.source_topic}});
  return Json{{"items", std::move(items)}, {"warnings", set.warnings}};
}

IntrusionSet intrusion_state_from_json(const Json& j) {
  IntrusionSet set;
  for (const auto& it : j.at("items"))
    set.items.push_back({it.at("topic_id").get<std::size_t>(), it.at("shown").get<std::vector<WordId>>(),
                         it.at("shown_words").get<std::vector<std::string>>(),
                         it.at("intruder_position").get<std::size_t>(), it.at("source_topic").get<std::size_t>()});
  set.warnings = j.value("warnings", std::vector<std::string>{});
  return set;
}

}  // namespace

Json session_to_json(const SessionState& s) {
  Json groups = Json::array();
  for (const auto& g : s.groups.groups) groups.push_back({{"id", g.id}, {"name", g.name}, {"anchors", g.anchors}});
  Json history = Json::array();
  for (const auto& h : s.history) history.push_back({{"seq", h.seq}, {"time", h.time}, {"event", h.event}});
  Json answers = Json::array();
  for (const auto& [item, a] : s.answers)
    answers.push_back({{"item", a.item}, {"position", a.position}, {"correct", a.correct}, {"time", a.time}});
  Json j{{"id", s.id},
         {"corpus", s.corpus_name},
         {"corpus_ref", s.corpus_ref},
         {"anchors", {{"indices", s.anchors.indices},
                      {"words", s.anchor_words},
                      {"residuals", s.anchors.residuals},
                      {"projection_dim", s.anchors.projection_dim ? Json(*s.anchors.projection_dim) : Json()},
                      {"candidate_filter", s.anchors.candidate_filter},
                      {"seed", s.anchors.seed}}},
         {"groups", std::move(groups)},
         {"next_group_id", s.groups.next_id},
         {"status", status_name(s.status)},
         {"version", s.version}};
  if (s.model) {
    Json cols = Json::array();
    for (Eigen::Index k = 0; k < s.model->num_topics(); ++k) {
      const Vector c = s.model->A.col(k);
      cols.push_back(std::vector<double>(c.data(), c.data() + c.size()));
    }
    j["model"] = {{"mode", s.model_mode},
                  {"num_words", s.model->num_words()},
                  {"names", s.model->topic_names},
                  {"columns", std::move(cols)},
                  {"metrics", s.metrics}};
  }
  if (s.intrusion) j["intrusion"] = intrusion_state_to_json(*s.intrusion);
  j["answers"] = std::move(answers);
  j["history"] = std::move(history);
  return j;
}

SessionState session_from_json(const Json& j) {
  try {
    SessionState s;
    s.id = j.at("id").get<std::string>();
    s.corpus_name = j.at("corpus").get<std::string>();
    s.corpus_ref = j.at("corpus_ref").get<std::string>();
    const auto& a = j.at("anchors");
    s.anchors.indices = a.at("indices").get<std::vector<WordId>>();
    s.anchor_words = a.at("words").get<std::vector<std::string>>();
    s.anchors.residuals = a.at("residuals").get<std::vector<double>>();
    if (!a.at("projection_dim").is_null()) s.anchors.projection_dim = a["projection_dim"].get<std::size_t>();
    s.anchors.candidate_filter = a.at("candidate_filter").get<std::size_t>();
    s.anchors.seed = a.at("seed").get<std::uint64_t>();
    for (const auto& g : j.at("groups"))
      s.groups.groups.push_back(
          {g.at("id").get<std::uint64_t>(), g.at("name").get<std::string>(), g.at("anchors").get<std::vector<std::size_t>>()});
    s.groups.next_id = j.at("next_group_id").get<std::uint64_t>();
    s.status = j.at("status").get<std::string>() == "recovered" ? SessionStatus::recovered : SessionStatus::editing;
    s.version = j.at("version").get<std::uint64_t>();
    if (j.contains("model")) {
      const auto& m = j["model"];
      const auto V = m.at("num_words").get<Eigen::Index>();
      const auto& cols = m.at("columns");
      TopicMatrix t{Matrix(V, static_cast<Eigen::Index>(cols.size())), m.at("names").get<std::vector<std::string>>()};
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const auto c = cols[k].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(c.size()) != V) throw ParseError("session model column length mismatch", 0);
        for (Eigen::Index i = 0; i < V; ++i) t.A(i, static_cast<Eigen::Index>(k)) = c[static_cast<std::size_t>(i)];
      }
      s.model = std::move(t);
      s.model_mode = m.at("mode").get<std::string>();
      s.metrics = m.value("metrics", Json());
    }
    if (j.contains("intrusion")) s.intrusion = intrusion_state_from_json(j["intrusion"]);
    for (const auto& x : j.at("answers")) {
      IntrusionAnswer ans{x.at("item").get<std::size_t>(), x.at("position").get<std::size_t>(),
                          x.at("correct").get<bool>(), x.at("time").get<std::string>()};
      s.answers[ans.item] = ans;
    }
    for (const auto& h : j.at("history"))
      s.history.push_back({h.at("seq").get<std::uint64_t>(), h.at("time").get<std::string>(), h.at("event")});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid session JSON: ") + e.what(), 0);
  }
}

}  // namespace itm
