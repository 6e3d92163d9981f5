#include "ivos/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ivos/error.hpp"

namespace ivos {

namespace {

constexpr const char* kKeys[] = {
    "dataset",         "listen_host",       "port",          "log_dir",
    "tokens",          "quota",             "max_interactions", "wall_budget_s",
    "budget_rate_s",   "threshold",         "cap_s",         "min_area_fraction",
    "max_components_per_kind", "simplify_epsilon_px", "cost_base_s", "cost_per_point_s",
    "boundary_tolerance",
};

bool known_key(const std::string& k) {
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const char* s) { return k == s; });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error(ErrorCode::format, "config key '" + key + "': not a number: '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error(ErrorCode::format, "config key '" + key + "': not an integer: '" + v + "'");
  }
  return out;
}

}  // namespace

void ServiceConfig::validate() const {
  if (dataset.empty()) throw Error(ErrorCode::invalid_argument, "config: dataset root is not set");
  if (port < 0 || port > 65535) throw Error(ErrorCode::invalid_argument, "config: port out of range");
  if (quota < 0) throw Error(ErrorCode::invalid_argument, "config: quota must be >= 0");
  if (max_interactions < 1) throw Error(ErrorCode::invalid_argument, "config: max_interactions must be >= 1");
  tracks.validate();
  robot.validate();
  cost_model.validate();
}

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& name) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = name + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(ErrorCode::format, where + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (!known_key(key)) throw Error(ErrorCode::format, where + ": unknown key '" + key + "'");
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

void apply_config(ServiceConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "dataset") cfg.dataset = v;
    else if (k == "listen_host") cfg.listen_host = v;
    else if (k == "port") cfg.port = to_int(k, v);
    else if (k == "log_dir") cfg.log_dir = v;
    else if (k == "tokens") {
      cfg.tokens.clear();
      std::istringstream in(v);
      std::string tok;
      while (std::getline(in, tok, ',')) {
        if (!trim(tok).empty()) cfg.tokens.push_back(trim(tok));
      }
    } else if (k == "quota") cfg.quota = to_int(k, v);
    else if (k == "max_interactions") cfg.max_interactions = to_int(k, v);
    else if (k == "wall_budget_s") {
      if (v.empty() || v == "none") cfg.wall_budget_s.reset();
      else cfg.wall_budget_s = to_double(k, v);
    } else if (k == "budget_rate_s") cfg.tracks.budget_rate_s = to_double(k, v);
    else if (k == "threshold") cfg.tracks.threshold = to_double(k, v);
    else if (k == "cap_s") cfg.tracks.cap_s = to_double(k, v);
    else if (k == "min_area_fraction") cfg.robot.min_area_fraction = to_double(k, v);
    else if (k == "max_components_per_kind") cfg.robot.max_components_per_kind = to_int(k, v);
    else if (k == "simplify_epsilon_px") cfg.robot.simplify_epsilon_px = to_double(k, v);
    else if (k == "cost_base_s") cfg.cost_model.base_s = to_double(k, v);
    else if (k == "cost_per_point_s") cfg.cost_model.per_point_s = to_double(k, v);
    else if (k == "boundary_tolerance") cfg.tolerance = BoundaryTolerance(to_double(k, v));
    else throw Error(ErrorCode::format, "unknown config key '" + k + "'");
  }
}

std::map<std::string, std::string> env_overrides() {
  std::map<std::string, std::string> kv;
  for (const char* key : kKeys) {
    std::string var = "IVOS_";
    for (const char* c = key; *c; ++c) var += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
    if (const char* v = std::getenv(var.c_str())) kv[key] = v;
  }
  return kv;
}

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const std::map<std::string, std::string>& overrides) {
  ServiceConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::io, "cannot read config file " + file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config(cfg, parse_key_values(ss.str(), file->string()));
  }
  apply_config(cfg, env_overrides());
  apply_config(cfg, overrides);
  cfg.validate();
  return cfg;
}

}  // namespace ivos
