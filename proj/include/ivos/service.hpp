#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>

#include "ivos/config.hpp"
#include "ivos/dataset.hpp"
#include "ivos/session.hpp"
#include "json.hpp"

namespace ivos {

class SessionLogWriter;

/// Transport-independent evaluation service. Every method validates the
/// token and throws ivos::Error; the HTTP layer maps errors onto the wire.
///
/// Sessions are persisted as <log_dir>/<id>.jsonl; a closed session also
/// gets <id>.report.json, whose bytes are what report() serves. On start-up
/// existing logs are scanned so closed sessions keep their reports and new
/// ids continue after the highest one found. Sessions left open by a
/// previous process cannot be resumed.
class EvaluationService {
 public:
  EvaluationService(ServiceConfig config, std::shared_ptr<const DatasetRepository> repo,
                    SessionClock clock = steady_session_clock());

  /// body: {"sequence": name} or {"split": name} (the first sequence of the
  /// split not yet started by this token). Returns {session_id, sequence,
  /// frames, width, height, objects, scribbles}.
  nlohmann::json start(const std::string& token, const nlohmann::json& body);

  /// Returns {"scribbles": ...} or, on closure, {"report": ...}.
  nlohmann::json submit(const std::string& token, const std::string& session_id, const nlohmann::json& body);

  /// Persisted report bytes of a closed session.
  std::string report(const std::string& token, const std::string& session_id);

  nlohmann::json health() const;

  const ServiceConfig& config() const { return config_; }

 private:
  struct Entry {
    std::mutex turn;  // one in-flight request per session
    std::string owner;
    std::string sequence;
    std::unique_ptr<Session> session;  // null for sessions restored from logs
    std::unique_ptr<SessionLogWriter> log;
    bool closed = false;
    std::string report_bytes;
  };

  void check_token(const std::string& token) const;
  std::shared_ptr<Entry> find(const std::string& token, const std::string& id) const;
  void restore_logs();
  std::string persist_report(const std::string& id);
  int started_count(const std::string& token) const;

  ServiceConfig config_;
  std::shared_ptr<const DatasetRepository> repo_;
  SessionClock clock_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, int> started_;  // per-token session count
  std::map<std::string, std::set<std::string>> started_sequences_;
  long long next_id_ = 1;
};

}  // namespace ivos
