#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivos/session.hpp"

namespace ivos {

struct ServiceConfig {
  std::filesystem::path dataset;
  std::string listen_host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path log_dir = "sessions";
  std::vector<std::string> tokens;  // empty: any non-empty token is accepted
  int quota = 0;                    // sessions per token, 0 = unlimited
  int max_interactions = 8;
  std::optional<double> wall_budget_s;
  TrackParams tracks;
  RobotParams robot;
  AnnotationCostModel cost_model;
  BoundaryTolerance tolerance;

  void validate() const;
};

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
/// Throws a format error naming the line for malformed input or unknown keys.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& name = "config");

/// Applies known keys onto `cfg`. Keys: dataset, listen_host, port, log_dir,
/// tokens (comma separated), quota, max_interactions, wall_budget_s,
/// budget_rate_s, threshold, cap_s, min_area_fraction,
/// max_components_per_kind, simplify_epsilon_px, cost_base_s,
/// cost_per_point_s, boundary_tolerance.
void apply_config(ServiceConfig& cfg, const std::map<std::string, std::string>& kv);

/// IVOS_<KEY in upper case> environment variables for every known key.
std::map<std::string, std::string> env_overrides();

/// File (optional), then environment, then `overrides` (command-line flags),
/// then validation.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const std::map<std::string, std::string>& overrides = {});

}  // namespace ivos
