#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ivos/session.hpp"
#include "json.hpp"

namespace ivos {

/// First line of a session log.
struct SessionLogHeader {
  std::string session_id;
  std::string owner;  // participant token, empty offline
  std::string sequence;
  int frames = 0;
  RasterSize size;
  std::vector<ObjectId> objects;
  std::vector<int> initial_frames;
  int max_interactions = 8;
  std::optional<double> wall_budget_s;
  TrackParams tracks;
  RobotParams robot;
  AnnotationCostModel cost_model;
  BoundaryTolerance tolerance;
};

SessionLogHeader make_log_header(const Session& s, std::string session_id, std::string owner);

struct SessionLog {
  SessionLogHeader header;
  std::vector<InteractionRecord> records;  // tables left empty
  std::optional<std::string> close_reason;

  bool closed() const { return close_reason.has_value(); }
};

/// Append-only JSON-lines writer: one header line, one line per
/// interaction, one closing line. Every line is flushed when written.
class SessionLogWriter {
 public:
  SessionLogWriter(const std::filesystem::path& path, const SessionLogHeader& header);

  void append(const InteractionRecord& r);
  void close(const std::string& reason, const TrackSummary& summary);

 private:
  void write_line(const nlohmann::json& j);

  std::filesystem::path path_;
  std::ofstream out_;
};

/// Throws a format error naming the 1-based line of the first bad record.
SessionLog parse_session_log(std::istream& in, const std::string& name = "session log");
SessionLog read_session_log(const std::filesystem::path& path);

/// Rebuilds the closed session's report from its log alone.
SessionReport report_from_log(const SessionLog& log);

/// The report document served for a closed session:
/// {session_id, sequence, reason, curve, per_object, quality_at_budget,
///  budget_s, speed_total_s, speed_reached, threshold, params}.
nlohmann::json report_json(const SessionLog& log);

nlohmann::json params_json(const SessionLogHeader& h);

}  // namespace ivos
