#pragma once

// Session store behind the HTTP API. Every method takes and returns JSON
// bodies and throws itm errors; http.hpp maps those onto status codes.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "itm/cooccur.hpp"
#include "itm/corpus.hpp"
#include "itm/session.hpp"

namespace itm {

struct ServiceConfig {
  /// Corpora live in <data_dir>/corpora/<name>/, sessions in <data_dir>/sessions/,
  /// co-occurrence and anchor caches in <data_dir>/cache/.
  std::filesystem::path data_dir = "data";
  std::size_t default_num_anchors = 500;
  std::size_t default_candidate_filter = 100;
  SolverOptions solver;
  EvaluationOptions evaluation;
  std::size_t top_n = 10;
  std::uint64_t intrusion_seed = 1;
};

/// A loaded corpus with its co-occurrence statistics, shared by all sessions on it.
struct CorpusBundle {
  std::string name;
  std::string ref;  // content hash, hex
  Corpus corpus;
  CooccurrenceStats stats;
  std::vector<std::size_t> doc_freq;
};

class Service {
 public:
  explicit Service(ServiceConfig config);

  /// Body: {"corpus": name, "num_anchors"?, "candidate_filter"?, "projection_dim"?, "seed"?}.
  Json create_session(const Json& body);
  Json get_session(const std::string& id);
  /// Candidate anchors in list order with frequencies and group membership.
  Json list_anchors(const std::string& id);
  Json get_groups(const std::string& id);
  /// Body: one edit object, or {"edits": [...]} applied all-or-nothing.
  Json edit_groups(const std::string& id, const Json& body);
  /// Body: grouping feedback JSON; replaces every group.
  Json replace_groups(const std::string& id, const Json& body);
  Json recover(const std::string& id, const std::string& mode);
  Json get_model(const std::string& id, bool full_columns);
  Json get_intrusion(const std::string& id);
  /// Body: {"answers": [{"item", "position"}]} or a single {"item", "position"}.
  Json post_intrusion(const std::string& id, const Json& body);

  /// Immutable snapshot of a session; loads it from disk if needed.
  std::shared_ptr<const SessionState> snapshot(const std::string& id);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Slot {
    std::mutex write;         // serializes mutations of this session
    std::mutex snapshot_mu;   // guards only the pointer swap
    std::shared_ptr<const SessionState> state;
  };

  std::shared_ptr<Slot> slot(const std::string& id);
  std::shared_ptr<const SessionState> read(Slot& s);
  void publish(Slot& s, SessionState next);
  std::shared_ptr<const CorpusBundle> bundle(const std::string& name);
  std::shared_ptr<const CorpusBundle> bundle_for(const SessionState& s);
  AnchorSet cached_anchors(const CorpusBundle& b, const AnchorOptions& options);
  std::filesystem::path session_path(const std::string& id) const;
  std::string new_session_id();

  ServiceConfig config_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::mutex corpora_mu_;
  std::map<std::string, std::shared_ptr<const CorpusBundle>> corpora_;
  std::mutex anchors_mu_;
  std::mutex id_mu_;
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_;
};

}  // namespace itm
