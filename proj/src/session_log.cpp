#include "ivos/session_log.hpp"

#include <istream>

#include "ivos/error.hpp"

namespace ivos {

using nlohmann::json;

SessionLogHeader make_log_header(const Session& s, std::string session_id, std::string owner) {
  const SessionConfig& c = s.config();
  SessionLogHeader h;
  h.session_id = std::move(session_id);
  h.owner = std::move(owner);
  h.sequence = c.sequence;
  h.frames = s.frames();
  h.size = s.size();
  h.objects = c.objects;
  h.initial_frames.assign(s.initial_frames().begin(), s.initial_frames().end());
  h.max_interactions = c.max_interactions;
  h.wall_budget_s = c.wall_budget_s;
  h.tracks = c.tracks;
  h.robot = c.robot;
  h.cost_model = c.cost_model;
  h.tolerance = c.tolerance;
  return h;
}

json params_json(const SessionLogHeader& h) {
  json p = {
      {"max_interactions", h.max_interactions},
      {"budget_rate_s", h.tracks.budget_rate_s},
      {"threshold", h.tracks.threshold},
      {"cap_s", h.tracks.cap_s},
      {"min_area_fraction", h.robot.min_area_fraction},
      {"max_components_per_kind", h.robot.max_components_per_kind},
      {"simplify_epsilon_px", h.robot.simplify_epsilon_px},
      {"connectivity", static_cast<int>(h.robot.connectivity)},
      {"cost_base_s", h.cost_model.base_s},
      {"cost_per_point_s", h.cost_model.per_point_s},
      {"boundary_tolerance", h.tolerance.fraction},
  };
  p["wall_budget_s"] = h.wall_budget_s ? json(*h.wall_budget_s) : json(nullptr);
  return p;
}

namespace {

json header_json(const SessionLogHeader& h) {
  return {{"type", "header"},       {"session_id", h.session_id}, {"owner", h.owner},
          {"sequence", h.sequence}, {"frames", h.frames},         {"width", h.size.width},
          {"height", h.size.height}, {"objects", h.objects},      {"initial_frames", h.initial_frames},
          {"params", params_json(h)}};
}

json per_object_json(const std::vector<std::pair<ObjectId, double>>& v) {
  json a = json::array();
  for (const auto& [id, x] : v) a.push_back({id, x});
  return a;
}

json summary_json(const TrackSummary& s) {
  return {{"quality_at_budget", s.quality_at_budget}, {"budget_s", s.budget_s},
          {"speed_total_s", s.speed_total_s},         {"speed_reached", s.speed_reached},
          {"threshold", s.threshold}};
}

SessionLogHeader parse_header(const json& j) {
  SessionLogHeader h;
  h.session_id = j.at("session_id").get<std::string>();
  h.owner = j.at("owner").get<std::string>();
  h.sequence = j.at("sequence").get<std::string>();
  h.frames = j.at("frames").get<int>();
  h.size = RasterSize(j.at("width").get<int>(), j.at("height").get<int>());
  h.objects = j.at("objects").get<std::vector<ObjectId>>();
  h.initial_frames = j.at("initial_frames").get<std::vector<int>>();
  const json& p = j.at("params");
  h.max_interactions = p.at("max_interactions").get<int>();
  if (!p.at("wall_budget_s").is_null()) h.wall_budget_s = p.at("wall_budget_s").get<double>();
  h.tracks.budget_rate_s = p.at("budget_rate_s").get<double>();
  h.tracks.threshold = p.at("threshold").get<double>();
  h.tracks.cap_s = p.at("cap_s").get<double>();
  h.robot.min_area_fraction = p.at("min_area_fraction").get<double>();
  h.robot.max_components_per_kind = p.at("max_components_per_kind").get<int>();
  h.robot.simplify_epsilon_px = p.at("simplify_epsilon_px").get<double>();
  h.robot.connectivity = static_cast<Connectivity>(p.at("connectivity").get<int>());
  h.cost_model.base_s = p.at("cost_base_s").get<double>();
  h.cost_model.per_point_s = p.at("cost_per_point_s").get<double>();
  h.tolerance.fraction = p.at("boundary_tolerance").get<double>();
  return h;
}

InteractionRecord parse_record(const json& j) {
  InteractionRecord r;
  r.index = j.at("index").get<int>();
  r.annotation_s = j.at("annotation_s").get<double>();
  r.compute_s = j.at("compute_s").get<double>();
  r.cumulative_s = j.at("cumulative_s").get<double>();
  r.overall = j.at("overall").get<double>();
  for (const json& e : j.at("per_object")) r.per_object.emplace_back(e.at(0).get<ObjectId>(), e.at(1).get<double>());
  return r;
}

}  // namespace

SessionLogWriter::SessionLogWriter(const std::filesystem::path& path, const SessionLogHeader& header)
    : path_(path), out_(path, std::ios::out | std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::io, "cannot create session log " + path.string());
  write_line(header_json(header));
}

void SessionLogWriter::write_line(const json& j) {
  out_ << j.dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::io, "write failed: " + path_.string());
}

void SessionLogWriter::append(const InteractionRecord& r) {
  write_line({{"type", "interaction"},
              {"index", r.index},
              {"annotation_s", r.annotation_s},
              {"compute_s", r.compute_s},
              {"cumulative_s", r.cumulative_s},
              {"overall", r.overall},
              {"per_object", per_object_json(r.per_object)}});
}

void SessionLogWriter::close(const std::string& reason, const TrackSummary& summary) {
  write_line({{"type", "close"}, {"reason", reason}, {"summary", summary_json(summary)}});
}

SessionLog parse_session_log(std::istream& in, const std::string& name) {
  SessionLog log;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::format, name + ": line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) fail("empty record");
    if (log.closed()) fail("record after close");
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header") fail("first record must be the header");
        log.header = parse_header(j);
        have_header = true;
      } else if (type == "interaction") {
        InteractionRecord r = parse_record(j);
        if (r.index != static_cast<int>(log.records.size()) + 1) fail("interaction index out of sequence");
        if (!log.records.empty() && !(r.cumulative_s > log.records.back().cumulative_s)) {
          fail("cumulative time not increasing");
        }
        log.records.push_back(std::move(r));
      } else if (type == "close") {
        log.close_reason = j.at("reason").get<std::string>();
      } else {
        fail("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      fail(e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::format) throw;
      fail(e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::format, name + ": empty log");
  return log;
}

SessionLog read_session_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open session log " + path.string());
  return parse_session_log(in, path.string());
}

SessionReport report_from_log(const SessionLog& log) {
  const SessionLogHeader& h = log.header;
  if (log.records.empty()) throw Error(ErrorCode::format, "session " + h.session_id + " has no interactions");
  SessionReport r;
  r.session_id = h.session_id;
  r.sequence = h.sequence;
  r.frames = h.frames;
  r.objects = static_cast<int>(h.objects.size());
  r.curve = make_curve(log.records);
  r.summary = summarize_tracks(r.curve, r.frames, r.objects, h.tracks);
  return r;
}

json report_json(const SessionLog& log) {
  if (!log.closed()) throw Error(ErrorCode::phase, "session " + log.header.session_id + " is still open");
  const SessionReport r = report_from_log(log);
  json curve = json::array();
  for (const auto& p : r.curve.points) curve.push_back({p.time_s, p.value});
  json per_object = json::array();
  for (const auto& [id, pts] : r.curve.per_object) {
    json c = json::array();
    for (const auto& p : pts) c.push_back({p.time_s, p.value});
    per_object.push_back({{"object_id", id}, {"curve", std::move(c)}});
  }
  json out = summary_json(r.summary);
  out["session_id"] = r.session_id;
  out["sequence"] = r.sequence;
  out["reason"] = *log.close_reason;
  out["interactions"] = log.records.size();
  out["curve"] = std::move(curve);
  out["per_object"] = std::move(per_object);
  out["params"] = params_json(log.header);
  return out;
}

}  // namespace ivos
