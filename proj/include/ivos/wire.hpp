#pragma once

#include <span>
#include <string>
#include <vector>

#include "ivos/error.hpp"
#include "ivos/raster.hpp"
#include "json.hpp"

namespace ivos {

/// Prediction body: {"masks": [ [ {"object_id": k, "runs": [...]}, ... ] per frame ]}.
/// Objects absent from a frame may be omitted.
nlohmann::json encode_prediction(std::span<const LabelMask> masks, std::span<const ObjectId> objects);

/// Also accepts {"labels": [ [row-major label per pixel] per frame ]}.
/// Throws format errors for bad RLE, undeclared or repeated object ids and
/// overlapping objects; size_mismatch for a wrong frame count.
std::vector<LabelMask> decode_prediction(const nlohmann::json& body, RasterSize size, int frames,
                                         std::span<const ObjectId> objects);

/// Wire error code: auth, not_found, phase, format, quota, busy, bad_request, internal.
std::string wire_code(ErrorCode code);
int http_status(ErrorCode code);
ErrorCode error_code_from_wire(const std::string& code);

nlohmann::json error_json(ErrorCode code, const std::string& message);

}  // namespace ivos
