#include "ivos/scribble_io.hpp"

#include <fstream>

#include "ivos/error.hpp"

namespace ivos {

using nlohmann::json;

json scribbles_to_json(const ScribbleSet& set, int num_frames) {
  int frames = num_frames;
  for (const auto& s : set.scribbles) frames = std::max(frames, s.frame + 1);
  json per_frame = json::array();
  for (int f = 0; f < frames; ++f) per_frame.push_back(json::array());
  for (const auto& s : set.scribbles) {
    json path = json::array();
    for (const auto& p : s.path) path.push_back({p.x, p.y});
    json item = {{"path", std::move(path)}, {"object_id", s.object_label}};
    if (s.start_time) item["start_time"] = *s.start_time;
    if (s.end_time) item["end_time"] = *s.end_time;
    per_frame[static_cast<std::size_t>(s.frame)].push_back(std::move(item));
  }
  return {{"sequence", set.sequence}, {"scribbles", std::move(per_frame)}};
}

namespace {

double coordinate(const json& v) {
  if (!v.is_number()) throw Error(ErrorCode::format, "scribble coordinate is not a number");
  const double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::format, "scribble coordinate outside [0,1]");
  return x;
}

}  // namespace

ScribbleSet scribbles_from_json(const json& j, ScribbleKind kind) {
  if (!j.is_object() || !j.contains("scribbles") || !j["scribbles"].is_array()) {
    throw Error(ErrorCode::format, "scribble document needs a 'scribbles' array");
  }
  ScribbleSet set;
  if (j.contains("sequence")) {
    if (!j["sequence"].is_string()) throw Error(ErrorCode::format, "'sequence' must be a string");
    set.sequence = j["sequence"].get<std::string>();
  }
  const json& frames = j["scribbles"];
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (!frames[f].is_array()) throw Error(ErrorCode::format, "frame entry " + std::to_string(f) + " is not an array");
    for (const json& item : frames[f]) {
      if (!item.is_object() || !item.contains("path") || !item["path"].is_array()) {
        throw Error(ErrorCode::format, "scribble without a path in frame " + std::to_string(f));
      }
      Scribble s;
      s.frame = static_cast<int>(f);
      s.kind = kind;
      const json& id = item.contains("object_id") ? item["object_id"] : json();
      if (!id.is_number_integer() || id.get<long long>() < 0 || id.get<long long>() > kMaxObjectId) {
        throw Error(ErrorCode::format, "scribble object_id must be an integer in [0,254]");
      }
      s.object_label = static_cast<ObjectId>(id.get<int>());
      for (const json& pt : item["path"]) {
        if (!pt.is_array() || pt.size() != 2) throw Error(ErrorCode::format, "path point must be [x, y]");
        s.path.push_back({coordinate(pt[0]), coordinate(pt[1])});
      }
      if (s.path.empty()) throw Error(ErrorCode::format, "empty scribble path in frame " + std::to_string(f));
      for (const char* key : {"start_time", "end_time"}) {
        if (!item.contains(key) || item[key].is_null()) continue;
        if (!item[key].is_number()) throw Error(ErrorCode::format, std::string(key) + " must be a number");
        (key[0] == 's' ? s.start_time : s.end_time) = item[key].get<double>();
      }
      set.scribbles.push_back(std::move(s));
    }
  }
  return set;
}

ScribbleSet load_scribble_file(const std::filesystem::path& path, ScribbleKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open scribble file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::format, path.string() + ": " + e.what());
  }
  return scribbles_from_json(j, kind);
}

void save_scribble_file(const std::filesystem::path& path, const ScribbleSet& set, int num_frames) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write scribble file " + path.string());
  out << scribbles_to_json(set, num_frames).dump() << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

}  // namespace ivos
