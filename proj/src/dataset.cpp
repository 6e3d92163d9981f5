#include "ivos/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "ivos/error.hpp"
#include "ivos/scribble_io.hpp"

namespace fs = std::filesystem;

namespace ivos {

const SequenceInfo& DatasetManifest::sequence(const std::string& name) const {
  const auto it = sequences.find(name);
  if (it == sequences.end()) throw Error(ErrorCode::not_found, "unknown sequence '" + name + "'");
  return it->second;
}

const std::vector<std::string>& DatasetManifest::split(const std::string& name) const {
  const auto it = splits.find(name);
  if (it == splits.end()) throw Error(ErrorCode::not_found, "unknown split '" + name + "'");
  return it->second;
}

namespace {

std::string frame_name(int frame, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05d%s", frame, ext);
  return buf;
}

// Number of files named 00000<ext>, 00001<ext>, ... ; any other file with
// that extension is an error.
int count_frames(const fs::path& dir, const std::string& ext, const std::string& seq) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, "sequence '" + seq + "': missing directory " + dir.string());
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) ++files;
  }
  int n = 0;
  while (fs::exists(dir / frame_name(n, ext.c_str()))) ++n;
  if (static_cast<std::size_t>(n) != files) {
    throw Error(ErrorCode::format, "sequence '" + seq + "': non-contiguous frame names in " + dir.string());
  }
  if (n == 0) throw Error(ErrorCode::format, "sequence '" + seq + "': no frames in " + dir.string());
  return n;
}

std::vector<std::string> read_split(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::io, "cannot read split file " + file.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    out.push_back(line.substr(start));
  }
  return out;
}

}  // namespace

fs::path image_path(const fs::path& root, const std::string& seq, int frame) {
  return root / "Images" / seq / frame_name(frame, ".jpg");
}

fs::path annotation_path(const fs::path& root, const std::string& seq, int frame) {
  return root / "Annotations" / seq / frame_name(frame, ".png");
}

DatasetManifest load_manifest(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::io, "dataset root not found: " + root.string());
  const fs::path split_dir = root / "Splits";
  if (!fs::is_directory(split_dir)) throw Error(ErrorCode::io, "missing split directory " + split_dir.string());

  DatasetManifest m;
  m.root = root;
  for (const auto& e : fs::directory_iterator(split_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") m.splits[e.path().stem().string()] = read_split(e.path());
  }
  if (m.splits.empty()) throw Error(ErrorCode::io, "no split files in " + split_dir.string());

  for (const auto& [split, seqs] : m.splits) {
    for (const auto& seq : seqs) {
      if (m.sequences.count(seq)) continue;
      SequenceInfo info;
      info.name = seq;
      info.frames = count_frames(root / "Annotations" / seq, ".png", seq);
      const int images = count_frames(root / "Images" / seq, ".jpg", seq);
      if (images != info.frames) {
        throw Error(ErrorCode::format, "sequence '" + seq + "': " + std::to_string(images) + " images but " +
                                           std::to_string(info.frames) + " annotations");
      }
      std::set<ObjectId> ids;
      for (int f = 0; f < info.frames; ++f) {
        const LabelMask mask = load_label_mask(annotation_path(root, seq, f));
        if (f == 0) info.size = mask.size;
        if (mask.size != info.size) {
          throw Error(ErrorCode::size_mismatch, "sequence '" + seq + "': frame " + std::to_string(f) + " size differs");
        }
        for (const ObjectId v : mask.labels) {
          if (v != 0) ids.insert(v);
        }
      }
      info.objects.assign(ids.begin(), ids.end());
      m.sequences.emplace(seq, std::move(info));
    }
  }
  return m;
}

DatasetRepository::DatasetRepository(DatasetManifest manifest) : manifest_(std::move(manifest)) {}

std::shared_ptr<const std::vector<LabelMask>> DatasetRepository::ground_truth(const std::string& seq) const {
  const SequenceInfo& info = manifest_.sequence(seq);
  {
    std::lock_guard lock(mu_);
    const auto it = gt_cache_.find(seq);
    if (it != gt_cache_.end()) return it->second;
  }
  auto frames = std::make_shared<std::vector<LabelMask>>();
  for (int f = 0; f < info.frames; ++f) frames->push_back(load_label_mask(annotation_path(manifest_.root, seq, f)));
  std::lock_guard lock(mu_);
  return gt_cache_.emplace(seq, std::move(frames)).first->second;
}

std::vector<RgbImage> DatasetRepository::images(const std::string& seq) const {
  const SequenceInfo& info = manifest_.sequence(seq);
  std::vector<RgbImage> out;
  for (int f = 0; f < info.frames; ++f) {
    out.push_back(load_rgb(image_path(manifest_.root, seq, f)));
    if (out.back().size != info.size) {
      throw Error(ErrorCode::size_mismatch, "sequence '" + seq + "': image " + std::to_string(f) + " size differs");
    }
  }
  return out;
}

std::optional<ScribbleSet> DatasetRepository::pool(const std::string& seq) const {
  manifest_.sequence(seq);
  const fs::path dir = manifest_.root / "Scribbles" / seq;
  if (!fs::is_directory(dir)) return std::nullopt;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  if (files.empty()) return std::nullopt;
  std::sort(files.begin(), files.end());
  ScribbleSet set = load_scribble_file(files.front(), ScribbleKind::human);
  set.sequence = seq;
  return set;
}

}  // namespace ivos
