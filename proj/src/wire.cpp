#include "ivos/wire.hpp"

#include <array>

#include "ivos/mask_ops.hpp"

namespace ivos {

using nlohmann::json;

json encode_prediction(std::span<const LabelMask> masks, std::span<const ObjectId> objects) {
  json frames = json::array();
  for (const auto& m : masks) {
    json items = json::array();
    for (const ObjectId id : objects) {
      const BinaryMask b = extract_object(m, id);
      if (b.empty()) continue;
      items.push_back({{"object_id", id}, {"runs", rle_encode(b).runs}});
    }
    frames.push_back(std::move(items));
  }
  return {{"masks", std::move(frames)}};
}

namespace {

std::array<bool, 256> declared(std::span<const ObjectId> objects) {
  std::array<bool, 256> ok{};
  for (const ObjectId id : objects) ok[id] = true;
  return ok;
}

std::vector<LabelMask> decode_rle_frames(const json& frames, RasterSize size, std::span<const ObjectId> objects) {
  const auto ok = declared(objects);
  std::vector<LabelMask> out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string where = "frame " + std::to_string(f) + ": ";
    if (!frames[f].is_array()) throw Error(ErrorCode::format, where + "expected a list of object masks");
    LabelMask m(size);
    std::array<bool, 256> seen{};
    for (const json& item : frames[f]) {
      if (!item.is_object() || !item.contains("object_id") || !item.contains("runs")) {
        throw Error(ErrorCode::format, where + "object mask needs object_id and runs");
      }
      const json& jid = item["object_id"];
      if (!jid.is_number_integer() || jid.get<long long>() < 1 || jid.get<long long>() > kMaxObjectId ||
          !ok[jid.get<std::size_t>()]) {
        throw Error(ErrorCode::format, where + "undeclared object_id " + jid.dump());
      }
      const auto id = static_cast<ObjectId>(jid.get<int>());
      if (seen[id]) throw Error(ErrorCode::format, where + "object " + std::to_string(id) + " listed twice");
      seen[id] = true;
      RleMask rle{size, {}};
      if (!item["runs"].is_array()) throw Error(ErrorCode::format, where + "runs must be a list");
      for (const json& r : item["runs"]) {
        if (!r.is_number_unsigned() || r.get<std::uint64_t>() > size.area()) {
          throw Error(ErrorCode::format, where + "bad run length " + r.dump());
        }
        rle.runs.push_back(r.get<std::uint32_t>());
      }
      const BinaryMask b = rle_decode(rle);
      for (std::size_t i = 0; i < b.bits.size(); ++i) {
        if (!b.bits[i]) continue;
        if (m.labels[i] != 0) throw Error(ErrorCode::format, where + "objects overlap");
        m.labels[i] = id;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<LabelMask> decode_label_frames(const json& frames, RasterSize size, std::span<const ObjectId> objects) {
  const auto ok = declared(objects);
  std::vector<LabelMask> out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string where = "frame " + std::to_string(f) + ": ";
    if (!frames[f].is_array() || frames[f].size() != size.area()) {
      throw Error(ErrorCode::format, where + "label payload must hold width*height values");
    }
    LabelMask m(size);
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      const json& v = frames[f][i];
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() > kMaxObjectId) {
        throw Error(ErrorCode::format, where + "bad label " + v.dump());
      }
      const auto id = v.get<std::size_t>();
      if (id != 0 && !ok[id]) throw Error(ErrorCode::format, where + "undeclared label " + v.dump());
      m.labels[i] = static_cast<ObjectId>(id);
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

std::vector<LabelMask> decode_prediction(const json& body, RasterSize size, int frames,
                                         std::span<const ObjectId> objects) {
  if (!body.is_object()) throw Error(ErrorCode::format, "prediction body must be an object");
  const bool rle = body.contains("masks");
  const bool raw = body.contains("labels");
  if (rle == raw) throw Error(ErrorCode::format, "prediction needs exactly one of 'masks' or 'labels'");
  const json& payload = rle ? body["masks"] : body["labels"];
  if (!payload.is_array()) throw Error(ErrorCode::format, "prediction payload must be a list of frames");
  if (payload.size() != static_cast<std::size_t>(frames)) {
    throw Error(ErrorCode::size_mismatch,
                "expected " + std::to_string(frames) + " frames, got " + std::to_string(payload.size()));
  }
  return rle ? decode_rle_frames(payload, size, objects) : decode_label_frames(payload, size, objects);
}

std::string wire_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::auth: return "auth";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::phase: return "phase";
    case ErrorCode::format:
    case ErrorCode::size_mismatch: return "format";
    case ErrorCode::quota: return "quota";
    case ErrorCode::busy: return "busy";
    case ErrorCode::invalid_argument: return "bad_request";
    case ErrorCode::io: return "internal";
  }
  return "internal";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::auth: return 401;
    case ErrorCode::not_found: return 404;
    case ErrorCode::phase: return 409;
    case ErrorCode::busy: return 409;
    case ErrorCode::quota: return 429;
    case ErrorCode::format:
    case ErrorCode::size_mismatch:
    case ErrorCode::invalid_argument: return 400;
    case ErrorCode::io: return 500;
  }
  return 500;
}

ErrorCode error_code_from_wire(const std::string& code) {
  if (code == "auth") return ErrorCode::auth;
  if (code == "not_found") return ErrorCode::not_found;
  if (code == "phase") return ErrorCode::phase;
  if (code == "format") return ErrorCode::format;
  if (code == "quota") return ErrorCode::quota;
  if (code == "busy") return ErrorCode::busy;
  if (code == "bad_request") return ErrorCode::invalid_argument;
  return ErrorCode::io;
}

json error_json(ErrorCode code, const std::string& message) {
  return {{"code", wire_code(code)}, {"message", message}};
}

}  // namespace ivos
