#pragma once

// On-disk fixtures for the service, client and CLI suites.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ivos/synth.hpp"

namespace ivos::testing {

/// Empty directory under the system temp dir, wiped on every call.
inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ivos_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Seed-7 moving squares: 2 sequences, 10 frames, 64x64, 2 objects.
inline std::filesystem::path synth_fixture(const std::string& name, const SynthSpec& spec = {}) {
  const auto root = fresh_dir(name);
  write_synth_dataset(spec, root);
  return root;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace ivos::testing
