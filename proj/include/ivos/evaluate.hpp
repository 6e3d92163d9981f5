#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ivos/baseline.hpp"
#include "ivos/client.hpp"
#include "ivos/config.hpp"
#include "ivos/dataset.hpp"
#include "ivos/session.hpp"

namespace ivos {

struct EvaluateOptions {
  std::filesystem::path dataset;
  std::string split = "val";
  std::vector<std::string> sequences;  // overrides the split when non-empty
  std::string segmenter = "linear";    // linear | oracle | static
  std::filesystem::path out = "ivos-out";
  ServiceConfig service;               // track, robot and cost parameters; dataset/log_dir are set here
  BaselineConfig baseline;
  std::optional<std::filesystem::path> features_dir;  // <dir>/<sequence>.ivfm replaces default features
  /// Charged per turn instead of the measured segmenter time; makes the
  /// whole output reproducible byte for byte.
  std::optional<double> fixed_compute_s;
  int jobs = 1;
};

struct EvaluateResult {
  AggregateReport aggregate;
  std::vector<LoopResult> loops;  // in sequence order
};

std::unique_ptr<Segmenter> make_segmenter(const std::string& name, const DatasetRepository& repo,
                                          const BaselineConfig& baseline,
                                          const std::optional<std::filesystem::path>& features_dir);

/// In-process evaluation: service, robot and client in one process with a
/// virtual session clock per worker thread that only advances by the charged
/// compute time. Writes <out>/sessions/<id>.jsonl and .report.json,
/// <out>/curve.csv, <out>/tracks.csv and <out>/summary.json.
EvaluateResult run_offline_evaluation(const EvaluateOptions& opts);

/// Re-scores closed session logs; writes curve.csv, tracks.csv and summary.json into out.
AggregateReport report_from_logs(const std::vector<std::filesystem::path>& logs, const std::filesystem::path& out);

void write_report_files(const AggregateReport& report, const std::filesystem::path& out);

}  // namespace ivos
