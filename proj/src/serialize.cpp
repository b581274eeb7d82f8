#include "itm/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "itm/error.hpp"

namespace itm {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("matrix must be an array of rows", 0);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("ragged matrix", 0);
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Json anchors_to_json(const AnchorSet& anchors, const Vocabulary& vocab) {
  Json j;
  Json words = Json::array();
  for (auto w : anchors.indices) words.push_back(vocab.word(w));
  j["words"] = std::move(words);
  j["indices"] = anchors.indices;
  j["residuals"] = anchors.residuals;
  j["params"] = {{"num_anchors", anchors.size()},
                 {"candidate_filter", anchors.candidate_filter},
                 {"projection_dim", anchors.projection_dim ? Json(*anchors.projection_dim) : Json(nullptr)},
                 {"seed", anchors.seed}};
  return j;
}

AnchorSet anchors_from_json(const Json& j) {
  try {
    AnchorSet a;
    a.indices = j.at("indices").get<std::vector<WordId>>();
    a.residuals = j.value("residuals", std::vector<double>(a.indices.size(), 0.0));
    if (j.contains("params")) {
      const auto& p = j["params"];
      a.candidate_filter = p.value("candidate_filter", std::size_t{0});
      a.seed = p.value("seed", std::uint64_t{0});
      if (p.contains("projection_dim") && !p["projection_dim"].is_null())
        a.projection_dim = p["projection_dim"].get<std::size_t>();
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid anchor set JSON: ") + e.what(), 0);
  }
}

Json feedback_to_json(const GroupingFeedback& feedback, const AnchorSet* anchors, const Vocabulary* vocab) {
  Json groups = Json::array();
  for (std::size_t g = 0; g < feedback.groups.size(); ++g) {
    Json entry;
    entry["name"] = g < feedback.names.size() ? feedback.names[g] : "group" + std::to_string(g);
    entry["anchors"] = feedback.groups[g];
    if (anchors && vocab) {
      Json words = Json::array();
      for (auto p : feedback.groups[g]) words.push_back(vocab->word(anchors->indices.at(p)));
      entry["words"] = std::move(words);
    }
    groups.push_back(std::move(entry));
  }
  return Json{{"groups", std::move(groups)}};
}

GroupingFeedback feedback_from_json(const Json& j) {
  try {
    GroupingFeedback f;
    for (const auto& g : j.at("groups")) {
      f.groups.push_back(g.at("anchors").get<std::vector<std::size_t>>());
      f.names.push_back(g.value("name", "group" + std::to_string(f.groups.size() - 1)));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid grouping feedback JSON: ") + e.what(), 0);
  }
}

Json topics_to_json(const TopicMatrix& topics, const Vocabulary& vocab, std::size_t top_n, bool full) {
  if (static_cast<std::size_t>(topics.num_words()) != vocab.size())
    throw ValidationError("vocabulary does not match topic matrix");
  Json j;
  j["num_words"] = topics.num_words();
  j["num_topics"] = topics.num_topics();
  Json list = Json::array();
  for (Eigen::Index k = 0; k < topics.num_topics(); ++k) {
    Json t;
    t["name"] = static_cast<std::size_t>(k) < topics.topic_names.size() ? topics.topic_names[static_cast<std::size_t>(k)]
                                                                        : "topic" + std::to_string(k);
    Json words = Json::array();
    for (auto w : top_words(topics.A, k, top_n))
      words.push_back({{"word", vocab.word(w)}, {"prob", topics.A(static_cast<Eigen::Index>(w), k)}});
    t["top_words"] = std::move(words);
    list.push_back(std::move(t));
  }
  j["topics"] = std::move(list);
  if (full) {
    Json cols = Json::array();
    for (Eigen::Index k = 0; k < topics.num_topics(); ++k) {
      Json c = Json::array();
      for (Eigen::Index i = 0; i < topics.num_words(); ++i) c.push_back(topics.A(i, k));
      cols.push_back(std::move(c));
    }
    j["columns"] = std::move(cols);
  }
  return j;
}

TopicMatrix topics_from_json(const Json& j) {
  try {
    if (!j.contains("columns")) throw ParseError("topic JSON lacks full columns", 0);
    const auto V = j.at("num_words").get<Eigen::Index>();
    const auto K = j.at("num_topics").get<Eigen::Index>();
    TopicMatrix t{Matrix(V, K), {}};
    const auto& cols = j["columns"];
    if (static_cast<Eigen::Index>(cols.size()) != K) throw ParseError("column count mismatch", 0);
    for (Eigen::Index k = 0; k < K; ++k) {
      const auto& c = cols[static_cast<std::size_t>(k)];
      if (static_cast<Eigen::Index>(c.size()) != V) throw ParseError("column length mismatch", 0);
      for (Eigen::Index i = 0; i < V; ++i) t.A(i, k) = c[static_cast<std::size_t>(i)].get<double>();
    }
    for (const auto& topic : j.at("topics")) t.topic_names.push_back(topic.value("name", ""));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid topic model JSON: ") + e.what(), 0);
  }
}

namespace {

constexpr char kTopicMagic[8] = {'I', 'T', 'M', 'A', 'v', '1', '\0', '\0'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_topic_cache(const TopicMatrix& topics, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kTopicMagic, 8);
  put_u64(out, static_cast<std::uint64_t>(topics.num_words()));
  put_u64(out, static_cast<std::uint64_t>(topics.num_topics()));
  for (Eigen::Index i = 0; i < topics.num_words(); ++i)
    for (Eigen::Index k = 0; k < topics.num_topics(); ++k) put_u64(out, std::bit_cast<std::uint64_t>(topics.A(i, k)));
}

TopicMatrix read_topic_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kTopicMagic, 8) != 0) throw ParseError("bad topic cache magic", 0);
  const auto rows = get_u64(in), cols = get_u64(in);
  if (std::filesystem::file_size(path) != 24 + rows * cols * 8) throw ParseError("topic cache size mismatch", 0);
  TopicMatrix t{Matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)), {}};
  for (Eigen::Index i = 0; i < t.num_words(); ++i)
    for (Eigen::Index k = 0; k < t.num_topics(); ++k) t.A(i, k) = std::bit_cast<double>(get_u64(in));
  return t;
}

Json metrics_to_json(const MetricsReport& r) {
  return Json{{"loglik_per_token", r.loglik_per_token},
              {"coherence_mean", r.coherence_mean},
              {"pct_unique_top_words", r.pct_unique_top_words},
              {"avg_topic_entropy", r.avg_topic_entropy},
              {"floored_tokens", r.floored_tokens},
              {"coherence_per_topic", r.coherence.per_topic},
              {"entropy_per_topic", r.entropy.per_topic},
              {"params",
               {{"top_n", r.params.top_n},
                {"epsilon", r.params.epsilon},
                {"gibbs_alpha", r.params.gibbs.alpha},
                {"gibbs_iterations", r.params.gibbs.iterations},
                {"gibbs_burn_in", r.params.gibbs.iterations / 2},
                {"gibbs_estimate", "mean of post-burn-in sampler states"},
                {"gibbs_seed", r.params.gibbs.seed}}}};
}

Json intrusion_items_to_json(const IntrusionSet& set) {
  Json items = Json::array();
  for (std::size_t i = 0; i < set.items.size(); ++i)
    items.push_back({{"item", i}, {"topic_id", set.items[i].topic_id}, {"shown_words", set.items[i].shown_words}});
  return Json{{"items", std::move(items)}, {"warnings", set.warnings}};
}

Json intrusion_key_to_json(const IntrusionSet& set) {
  Json key = Json::array();
  for (std::size_t i = 0; i < set.items.size(); ++i)
    key.push_back({{"item", i},
                   {"intruder_position", set.items[i].intruder_position},
                   {"intruder_word", set.items[i].shown_words[set.items[i].intruder_position]},
                   {"source_topic", set.items[i].source_topic}});
  return Json{{"answers", std::move(key)}};
}

Json ideal_model_to_json(const IdealizedModel& ideal) {
  return Json{{"M", matrix_to_json(ideal.M)},
              {"R_M", matrix_to_json(ideal.R_M)},
              {"tau", {{"focus", ideal.tau.focus}, {"concentration", ideal.tau.concentration}, {"spread", ideal.tau.spread}}}};
}

IdealizedModel ideal_model_from_json(const Json& j) {
  try {
    IdealizedModel m;
    m.M = matrix_from_json(j.at("M"));
    m.R_M = matrix_from_json(j.at("R_M"));
    if (j.contains("tau")) {
      m.tau.focus = j["tau"].value("focus", m.tau.focus);
      m.tau.concentration = j["tau"].value("concentration", m.tau.concentration);
      m.tau.spread = j["tau"].value("spread", m.tau.spread);
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid ideal model JSON: ") + e.what(), 0);
  }
}

Json subtopic_model_to_json(const SubtopicModel& model) {
  return Json{{"A", matrix_to_json(model.A)},
              {"R_A", matrix_to_json(model.R_A)},
              {"groups", model.groups},
              {"planted_anchors", model.planted_anchors},
              {"base_vocab", model.base_vocab},
              {"anchor_mass", model.anchor_mass},
              {"subtopic_distribution", "dirichlet(mean = M_k, scalar concentration)"}};
}

SubtopicModel subtopic_model_from_json(const Json& j) {
  try {
    SubtopicModel m;
    m.A = matrix_from_json(j.at("A"));
    m.R_A = matrix_from_json(j.at("R_A"));
    m.groups = j.at("groups").get<std::vector<std::vector<std::size_t>>>();
    m.planted_anchors = j.value("planted_anchors", std::vector<WordId>{});
    m.base_vocab = j.at("base_vocab").get<std::size_t>();
    m.anchor_mass = j.value("anchor_mass", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid subtopic model JSON: ") + e.what(), 0);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write " + tmp);
    out << j.dump(2) << '\n';
    if (!out) throw Error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace itm
