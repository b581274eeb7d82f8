#include "itm/service.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <regex>

#include "itm/error.hpp"
#include "itm/rng.hpp"

namespace itm {

namespace fs = std::filesystem;

namespace {

// Names become path components, so only a conservative character set is allowed.
void check_name(const std::string& name, const char* what) {
  static const std::regex ok("[A-Za-z0-9_][A-Za-z0-9_.-]*");
  if (name.size() > 128 || !std::regex_match(name, ok))
    throw ValidationError(std::string("invalid ") + what + " '" + name + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json null_or(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  fs::create_directories(config_.data_dir / "sessions");
  fs::create_directories(config_.data_dir / "cache");
  std::random_device rd;
  id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
             static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
}

fs::path Service::session_path(const std::string& id) const { return config_.data_dir / "sessions" / (id + ".json"); }

std::string Service::new_session_id() {
  std::lock_guard lock(id_mu_);
  for (;;) {
    auto id = hex64(derive_seed(id_salt_, id_counter_++));
    if (!fs::exists(session_path(id))) return id;
  }
}

std::shared_ptr<const CorpusBundle> Service::bundle(const std::string& name) {
  check_name(name, "corpus name");
  std::lock_guard lock(corpora_mu_);
  if (auto it = corpora_.find(name); it != corpora_.end()) return it->second;
  const auto dir = config_.data_dir / "corpora" / name;
  if (!fs::is_directory(dir)) throw NotFoundError("unknown corpus '" + name + "'");
  auto corpus = load_corpus(CorpusPaths::in_directory(dir));
  auto stats = cached_cooccurrence(corpus, config_.data_dir / "cache");
  auto df = corpus.document_frequency();
  const auto ref = hex64(corpus.content_hash());
  auto b = std::make_shared<const CorpusBundle>(CorpusBundle{name, ref, std::move(corpus), std::move(stats), std::move(df)});
  corpora_.emplace(name, b);
  return b;
}

std::shared_ptr<const CorpusBundle> Service::bundle_for(const SessionState& s) {
  auto b = bundle(s.corpus_name);
  if (b->ref != s.corpus_ref)
    throw ConflictError("corpus '" + s.corpus_name + "' changed since session " + s.id + " was created");
  return b;
}

AnchorSet Service::cached_anchors(const CorpusBundle& b, const AnchorOptions& o) {
  const auto key = b.ref + "-T" + std::to_string(o.num_anchors) + "-f" + std::to_string(o.candidate_filter) + "-p" +
                   (o.projection_dim ? std::to_string(*o.projection_dim) : std::string("none")) + "-s" +
                   std::to_string(o.seed);
  const auto path = config_.data_dir / "cache" / (key + ".anchors.json");
  std::lock_guard lock(anchors_mu_);
  if (fs::exists(path)) return anchors_from_json(read_json_file(path));
  auto anchors = find_anchors(b.stats, b.doc_freq, o);
  write_json_file(path, anchors_to_json(anchors, b.corpus.vocabulary()));
  return anchors;
}

std::shared_ptr<Service::Slot> Service::slot(const std::string& id) {
  check_name(id, "session id");
  std::lock_guard lock(sessions_mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  const auto path = session_path(id);
  if (!fs::exists(path)) throw NotFoundError("unknown session '" + id + "'");
  auto s = std::make_shared<Slot>();
  s->state = std::make_shared<const SessionState>(session_from_json(read_json_file(path)));
  sessions_.emplace(id, s);
  return s;
}

std::shared_ptr<const SessionState> Service::read(Slot& s) {
  std::lock_guard lock(s.snapshot_mu);
  return s.state;
}

void Service::publish(Slot& s, SessionState next) {
  write_json_file(session_path(next.id), session_to_json(next));
  auto p = std::make_shared<const SessionState>(std::move(next));
  std::lock_guard lock(s.snapshot_mu);
  s.state = std::move(p);
}

std::shared_ptr<const SessionState> Service::snapshot(const std::string& id) { return read(*slot(id)); }

Json Service::create_session(const Json& body) {
  if (!body.is_object() || !body.contains("corpus") || !body["corpus"].is_string())
    throw ValidationError("session creation needs {\"corpus\": name}");
  const auto b = bundle(body["corpus"].get<std::string>());
  AnchorOptions o;
  try {
    o.num_anchors = body.value("num_anchors", config_.default_num_anchors);
    o.candidate_filter = body.value("candidate_filter", config_.default_candidate_filter);
    if (body.contains("projection_dim") && !body["projection_dim"].is_null())
      o.projection_dim = body["projection_dim"].get<std::size_t>();
    o.seed = body.value("seed", o.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid session parameters: ") + e.what());
  }

  SessionState s;
  s.id = new_session_id();
  s.corpus_name = b->name;
  s.corpus_ref = b->ref;
  s.anchors = cached_anchors(*b, o);
  for (auto w : s.anchors.indices) s.anchor_words.push_back(b->corpus.vocabulary().word(w));

  auto slot = std::make_shared<Slot>();
  publish(*slot, std::move(s));
  const auto snap = read(*slot);
  {
    std::lock_guard lock(sessions_mu_);
    sessions_.emplace(snap->id, slot);
  }
  return get_session(snap->id);
}

Json Service::get_session(const std::string& id) {
  const auto s = snapshot(id);
  Json history = Json::array();
  for (const auto& h : s->history) history.push_back({{"seq", h.seq}, {"time", h.time}, {"event", h.event}});
  return Json{{"id", s->id},
              {"corpus", s->corpus_name},
              {"corpus_ref", s->corpus_ref},
              {"status", status_name(s->status)},
              {"version", s->version},
              {"num_anchors", s->anchors.size()},
              {"anchor_params",
               {{"candidate_filter", s->anchors.candidate_filter},
                {"projection_dim", null_or(s->anchors.projection_dim)},
                {"seed", s->anchors.seed}}},
              {"groups", groups_to_json(s->groups, s->anchor_words, s->version)["groups"]},
              {"model_mode", s->model ? Json(s->model_mode) : Json(nullptr)},
              {"history", std::move(history)}};
}

Json Service::list_anchors(const std::string& id) {
  const auto s = snapshot(id);
  const auto b = bundle_for(*s);
  const auto freq = b->corpus.word_frequency();
  Json list = Json::array();
  for (std::size_t p = 0; p < s->anchors.size(); ++p) {
    const auto w = s->anchors.indices[p];
    const auto* g = s->groups.owner(p);
    list.push_back({{"position", p},
                    {"word", s->anchor_words[p]},
                    {"word_index", w},
                    {"frequency", freq[w]},
                    {"doc_frequency", b->doc_freq[w]},
                    {"residual", p < s->anchors.residuals.size() ? s->anchors.residuals[p] : 0.0},
                    {"group", g ? Json(g->id) : Json(nullptr)},
                    {"group_name", g ? Json(g->name) : Json(nullptr)}});
  }
  return Json{{"version", s->version}, {"anchors", std::move(list)}};
}

Json Service::get_groups(const std::string& id) {
  const auto s = snapshot(id);
  return groups_to_json(s->groups, s->anchor_words, s->version);
}

Json Service::edit_groups(const std::string& id, const Json& body) {
  auto sl = slot(id);
  std::lock_guard lock(sl->write);
  SessionState next = *read(*sl);
  const auto& words = next.anchor_words;
  const AnchorResolver resolve = [&words](const std::string& w) {
    for (std::size_t p = 0; p < words.size(); ++p)
      if (words[p] == w) return p;
    throw ValidationError("'" + w + "' is not a candidate anchor");
  };
  std::vector<GroupEdit> edits;
  if (body.is_object() && body.contains("edits")) {
    if (!body["edits"].is_array() || body["edits"].empty()) throw ValidationError("\"edits\" must be a non-empty array");
    for (const auto& e : body["edits"]) edits.push_back(edit_from_json(e, resolve));
  } else {
    edits.push_back(edit_from_json(body, resolve));
  }
  for (const auto& e : edits) record_edit(next, e);
  publish(*sl, std::move(next));
  const auto s = read(*sl);
  return groups_to_json(s->groups, s->anchor_words, s->version);
}

Json Service::replace_groups(const std::string& id, const Json& body) {
  return edit_groups(id, Json{{"op", "replace"}, {"feedback", body}});
}

Json Service::recover(const std::string& id, const std::string& mode) {
  if (mode != "full" && mode != "partial") throw ValidationError("mode must be full or partial, got '" + mode + "'");
  auto sl = slot(id);
  std::lock_guard lock(sl->write);
  SessionState next = *read(*sl);
  const auto feedback = next.groups.to_feedback();
  if (feedback.groups.empty()) throw ValidationError("session has no groups to recover topics from");
  const auto b = bundle_for(next);
  auto topics = mode == "full" ? full_interactive_recovery(b->stats, next.anchors, feedback, config_.solver)
                               : partial_interactive_recovery(b->stats, next.anchors, feedback, config_.solver);
  auto metrics = metrics_to_json(evaluate_model(topics, b->corpus, config_.evaluation));
  IntrusionSet intrusion;
  if (topics.num_topics() >= 2)
    intrusion = make_intrusion_items(topics, b->corpus.vocabulary(), config_.top_n, config_.intrusion_seed);
  else
    intrusion.warnings.push_back("word intrusion needs at least 2 topics");
  record_recovery(next, std::move(topics), mode, std::move(metrics), std::move(intrusion));
  publish(*sl, std::move(next));
  return get_model(id, false);
}

Json Service::get_model(const std::string& id, bool full_columns) {
  const auto s = snapshot(id);
  if (!s->model) throw NotFoundError("session '" + id + "' has no recovered model");
  const auto b = bundle_for(*s);
  return Json{{"mode", s->model_mode},
              {"version", s->version},
              {"model", topics_to_json(*s->model, b->corpus.vocabulary(), config_.top_n, full_columns)},
              {"metrics", s->metrics}};
}

namespace {

Json answers_json(const SessionState& s) {
  Json list = Json::array();
  for (const auto& [item, a] : s.answers)
    list.push_back({{"item", a.item}, {"position", a.position}, {"correct", a.correct}, {"time", a.time}});
  return list;
}

}  // namespace

Json Service::get_intrusion(const std::string& id) {
  const auto s = snapshot(id);
  if (s->status != SessionStatus::recovered || !s->intrusion)
    throw ValidationError("intrusion tasks need a recovered model; run recovery first");
  auto j = intrusion_items_to_json(*s->intrusion);
  j["answers"] = answers_json(*s);
  j["version"] = s->version;
  return j;
}

Json Service::post_intrusion(const std::string& id, const Json& body) {
  std::vector<std::pair<std::size_t, std::size_t>> answers;
  try {
    auto one = [&](const Json& a) {
      answers.emplace_back(a.at("item").get<std::size_t>(), a.at("position").get<std::size_t>());
    };
    if (body.is_object() && body.contains("answers"))
      for (const auto& a : body["answers"]) one(a);
    else
      one(body);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid intrusion answers: ") + e.what());
  }
  auto sl = slot(id);
  std::lock_guard lock(sl->write);
  SessionState next = *read(*sl);
  Json records = Json::array();
  for (auto [item, position] : answers) {
    const auto& a = record_answer(next, item, position);
    records.push_back({{"item", a.item}, {"position", a.position}, {"correct", a.correct}, {"time", a.time}});
  }
  publish(*sl, std::move(next));
  return Json{{"recorded", std::move(records)}, {"answers", answers_json(*read(*sl))}};
}

}  // namespace itm
