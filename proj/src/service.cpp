#include "ivos/service.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ivos/error.hpp"
#include "ivos/scribble_io.hpp"
#include "ivos/session_log.hpp"
#include "ivos/wire.hpp"

namespace fs = std::filesystem;

namespace ivos {

using nlohmann::json;

EvaluationService::EvaluationService(ServiceConfig config, std::shared_ptr<const DatasetRepository> repo,
                                     SessionClock clock)
    : config_(std::move(config)), repo_(std::move(repo)), clock_(std::move(clock)) {
  config_.validate();
  std::error_code ec;
  fs::create_directories(config_.log_dir, ec);
  if (!fs::is_directory(config_.log_dir)) {
    throw Error(ErrorCode::io, "cannot create log directory " + config_.log_dir.string());
  }
  restore_logs();
}

void EvaluationService::restore_logs() {
  for (const auto& e : fs::directory_iterator(config_.log_dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".jsonl") continue;
    const std::string id = e.path().stem().string();
    if (id.size() > 1 && id[0] == 's' && std::all_of(id.begin() + 1, id.end(), ::isdigit)) {
      next_id_ = std::max(next_id_, std::stoll(id.substr(1)) + 1);
    }
    const SessionLog log = read_session_log(e.path());
    auto entry = std::make_shared<Entry>();
    entry->owner = log.header.owner;
    entry->sequence = log.header.sequence;
    entry->closed = log.closed();
    if (entry->closed) {
      const fs::path report = config_.log_dir / (id + ".report.json");
      if (fs::exists(report)) {
        std::ifstream in(report, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        entry->report_bytes = ss.str();
      } else {
        entry->report_bytes = persist_report(id);
      }
    }
    ++started_[entry->owner];
    started_sequences_[entry->owner].insert(entry->sequence);
    sessions_[id] = std::move(entry);
  }
}

std::string EvaluationService::persist_report(const std::string& id) {
  const SessionLog log = read_session_log(config_.log_dir / (id + ".jsonl"));
  const std::string bytes = report_json(log).dump() + "\n";
  const fs::path final_path = config_.log_dir / (id + ".report.json");
  const fs::path tmp = config_.log_dir / (id + ".report.json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out) throw Error(ErrorCode::io, "cannot write report " + tmp.string());
  }
  fs::rename(tmp, final_path);
  return bytes;
}

int EvaluationService::started_count(const std::string& token) const {
  const auto it = started_.find(token);
  return it == started_.end() ? 0 : it->second;
}

void EvaluationService::check_token(const std::string& token) const {
  if (token.empty()) throw Error(ErrorCode::auth, "missing participant token");
  if (!config_.tokens.empty() &&
      std::find(config_.tokens.begin(), config_.tokens.end(), token) == config_.tokens.end()) {
    throw Error(ErrorCode::auth, "unknown participant token");
  }
}

std::shared_ptr<EvaluationService::Entry> EvaluationService::find(const std::string& token,
                                                                  const std::string& id) const {
  check_token(token);
  std::shared_lock lock(mu_);
  const auto it = sessions_.find(id);
  // Foreign sessions look exactly like missing ones.
  if (it == sessions_.end() || it->second->owner != token) {
    throw Error(ErrorCode::not_found, "no session '" + id + "'");
  }
  return it->second;
}

json EvaluationService::start(const std::string& token, const json& body) {
  check_token(token);
  if (!body.is_object()) throw Error(ErrorCode::format, "start body must be an object");
  std::string seq;
  {
    std::shared_lock lock(mu_);
    if (body.contains("sequence") && body["sequence"].is_string()) {
      seq = body["sequence"].get<std::string>();
    } else if (body.contains("split") && body["split"].is_string()) {
      const auto done = started_sequences_.find(token);
      for (const auto& s : repo_->manifest().split(body["split"].get<std::string>())) {
        if (done == started_sequences_.end() || !done->second.count(s)) {
          seq = s;
          break;
        }
      }
      if (seq.empty()) throw Error(ErrorCode::quota, "every sequence of the split was already started");
    } else {
      throw Error(ErrorCode::format, "start body needs a 'sequence' or 'split' string");
    }
    if (config_.quota > 0 && started_count(token) >= config_.quota) {
      throw Error(ErrorCode::quota, "session quota of " + std::to_string(config_.quota) + " reached");
    }
  }
  const SequenceInfo& info = repo_->manifest().sequence(seq);

  SessionConfig sc;
  sc.sequence = seq;
  sc.objects = info.objects;
  sc.max_interactions = config_.max_interactions;
  sc.wall_budget_s = config_.wall_budget_s;
  sc.tolerance = config_.tolerance;
  sc.robot = config_.robot;
  sc.cost_model = config_.cost_model;
  sc.tracks = config_.tracks;

  auto entry = std::make_shared<Entry>();
  entry->owner = token;
  entry->sequence = seq;

  std::string id;
  {
    std::unique_lock lock(mu_);
    if (config_.quota > 0 && started_[token] >= config_.quota) {
      throw Error(ErrorCode::quota, "session quota of " + std::to_string(config_.quota) + " reached");
    }
    id = "s" + std::to_string(next_id_++);
    ++started_[token];
    started_sequences_[token].insert(seq);
    sessions_[id] = entry;
  }
  std::lock_guard turn(entry->turn);
  try {
    entry->session = std::make_unique<Session>(sc, repo_->ground_truth(seq), repo_->pool(seq), clock_);
    entry->log = std::make_unique<SessionLogWriter>(config_.log_dir / (id + ".jsonl"),
                                                    make_log_header(*entry->session, id, token));
  } catch (...) {
    std::unique_lock lock(mu_);
    sessions_.erase(id);
    --started_[token];
    throw;
  }
  const Session& s = *entry->session;
  return {{"session_id", id},
          {"sequence", seq},
          {"frames", s.frames()},
          {"width", s.size().width},
          {"height", s.size().height},
          {"objects", s.config().objects},
          {"scribbles", scribbles_to_json(s.initial_scribbles(), s.frames())}};
}

json EvaluationService::submit(const std::string& token, const std::string& session_id, const json& body) {
  const auto entry = find(token, session_id);
  std::unique_lock turn(entry->turn, std::try_to_lock);
  if (!turn.owns_lock()) throw Error(ErrorCode::busy, "another request for this session is in flight");
  if (entry->closed) throw Error(ErrorCode::phase, "session is closed");
  if (!entry->session) throw Error(ErrorCode::phase, "session was interrupted by a server restart");

  Session& s = *entry->session;
  if (s.phase() != Phase::awaiting_prediction) throw Error(ErrorCode::phase, "session is not awaiting a prediction");
  const std::vector<LabelMask> masks = decode_prediction(body, s.size(), s.frames(), s.config().objects);
  const SubmitOutcome out = s.submit(masks);
  entry->log->append(out.record);
  if (out.closed) {
    entry->log->close(out.reason, s.summary());
    entry->log.reset();
    entry->report_bytes = persist_report(session_id);
    entry->closed = true;
    return {{"report", json::parse(entry->report_bytes)}};
  }
  json response = {{"scribbles", scribbles_to_json(out.next, s.frames())}};
  s.mark_delivered();
  return response;
}

std::string EvaluationService::report(const std::string& token, const std::string& session_id) {
  const auto entry = find(token, session_id);
  std::unique_lock turn(entry->turn, std::try_to_lock);
  if (!turn.owns_lock()) throw Error(ErrorCode::busy, "another request for this session is in flight");
  if (!entry->closed) throw Error(ErrorCode::phase, "session is still open");
  return entry->report_bytes;
}

json EvaluationService::health() const {
  std::shared_lock lock(mu_);
  return {{"status", "ok"},
          {"sequences", repo_->manifest().sequences.size()},
          {"sessions", sessions_.size()}};
}

}  // namespace ivos
