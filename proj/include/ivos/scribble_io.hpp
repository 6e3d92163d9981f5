#pragma once

#include <filesystem>
#include <string>

#include "ivos/robot.hpp"
#include "json.hpp"

namespace ivos {

/// Scribble file schema, also used on the wire:
///   {"sequence": name,
///    "scribbles": [ [ {"path": [[x, y], ...], "object_id": k,
///                      "start_time"?: s, "end_time"?: s}, ... ] per frame ]}
/// Coordinates are normalized to [0,1]. `num_frames` pads the frame list;
/// it is extended as needed to cover every referenced frame.
nlohmann::json scribbles_to_json(const ScribbleSet& set, int num_frames = 0);

/// Parses the schema above; every scribble gets `kind`. Throws format errors
/// on schema violations or coordinates outside [0,1].
ScribbleSet scribbles_from_json(const nlohmann::json& j, ScribbleKind kind);

ScribbleSet load_scribble_file(const std::filesystem::path& path, ScribbleKind kind = ScribbleKind::human);
void save_scribble_file(const std::filesystem::path& path, const ScribbleSet& set, int num_frames = 0);

}  // namespace ivos
