#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ivos/image_io.hpp"
#include "ivos/robot.hpp"

namespace ivos {

struct SequenceInfo {
  std::string name;
  int frames = 0;
  RasterSize size;
  std::vector<ObjectId> objects;  // ascending, union over all frames
};

/// Layout under the root:
///   Images/<seq>/00000.jpg ...   Annotations/<seq>/00000.png ...
///   Splits/<split>.txt (one sequence per line)
///   Scribbles/<seq>/<annotator>.json (optional pool)
struct DatasetManifest {
  std::filesystem::path root;
  std::map<std::string, std::vector<std::string>> splits;
  std::map<std::string, SequenceInfo> sequences;

  const SequenceInfo& sequence(const std::string& name) const;
  const std::vector<std::string>& split(const std::string& name) const;
};

/// Reads every split file and validates each listed sequence: contiguous
/// 5-digit frame names, matching image and annotation counts, readable masks
/// of one size. Errors name the offending path or sequence.
DatasetManifest load_manifest(const std::filesystem::path& root);

std::filesystem::path image_path(const std::filesystem::path& root, const std::string& seq, int frame);
std::filesystem::path annotation_path(const std::filesystem::path& root, const std::string& seq, int frame);

/// Read-only access to ground truth, frames and scribble pools. Loads lazily
/// and caches; safe to share between threads.
class DatasetRepository {
 public:
  explicit DatasetRepository(DatasetManifest manifest);

  const DatasetManifest& manifest() const { return manifest_; }
  std::shared_ptr<const std::vector<LabelMask>> ground_truth(const std::string& seq) const;
  std::vector<RgbImage> images(const std::string& seq) const;
  /// Scribbles of the first annotator in file-name order, if any.
  std::optional<ScribbleSet> pool(const std::string& seq) const;

 private:
  DatasetManifest manifest_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const std::vector<LabelMask>>> gt_cache_;
};

}  // namespace ivos
