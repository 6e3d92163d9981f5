#include "ivos/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

#include "ivos/dataset.hpp"
#include "ivos/error.hpp"

namespace fs = std::filesystem;

namespace ivos {

namespace {

constexpr std::uint8_t kObjectColours[3][3] = {{220, 50, 40}, {40, 200, 70}, {60, 90, 230}};

int reflect(int p, int range) {
  if (range == 0) return 0;
  const int period = 2 * range;
  int m = p % period;
  if (m < 0) m += period;
  return m <= range ? m : period - m;
}

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

void SynthSpec::validate() const {
  if (sequences < 1) throw Error(ErrorCode::invalid_argument, "synth: need at least one sequence");
  if (frames < 1) throw Error(ErrorCode::invalid_argument, "synth: need at least one frame");
  if (objects < 1 || objects > 3) throw Error(ErrorCode::invalid_argument, "synth: objects must be 1..3");
  if (size.height / objects < 6 || size.width < 12) {
    throw Error(ErrorCode::invalid_argument, "synth: raster too small for the object bands");
  }
  if (split.empty()) throw Error(ErrorCode::invalid_argument, "synth: empty split name");
}

std::vector<std::vector<SquareTrack>> synth_tracks(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const int band = spec.size.height / spec.objects;
  std::vector<std::vector<SquareTrack>> out(static_cast<std::size_t>(spec.sequences));
  for (auto& seq : out) {
    for (int k = 0; k < spec.objects; ++k) {
      SquareTrack tr;
      tr.band_top = k * band;
      tr.band_height = band;
      const int max_side = std::min(band * 4 / 5, spec.size.width / 2);
      tr.side = uniform(rng, std::max(3, band * 2 / 5), std::max(3, max_side));
      const int range_x = spec.size.width - tr.side;
      const int range_y = band - tr.side;
      tr.x0 = uniform(rng, 0, range_x);
      tr.y0 = uniform(rng, 0, range_y);
      if (spec.motion == Motion::bounce) {
        tr.vx = uniform(rng, 1, 3) * (uniform(rng, 0, 1) ? 1 : -1);
        tr.vy = uniform(rng, 0, 1) * (uniform(rng, 0, 1) ? 1 : -1);
      } else {
        // Largest velocities that keep the square inside for every frame.
        const int span = std::max(1, spec.frames - 1);
        tr.vx = uniform(rng, -tr.x0 / span, (range_x - tr.x0) / span);
        tr.vy = uniform(rng, -tr.y0 / span, (range_y - tr.y0) / span);
      }
      seq.push_back(tr);
    }
  }
  return out;
}

Pixel square_position(const SquareTrack& tr, Motion motion, RasterSize size, int t) {
  const int range_x = size.width - tr.side;
  const int range_y = tr.band_height - tr.side;
  if (motion == Motion::linear) return {tr.x0 + tr.vx * t, tr.band_top + tr.y0 + tr.vy * t};
  return {reflect(tr.x0 + tr.vx * t, range_x), tr.band_top + reflect(tr.y0 + tr.vy * t, range_y)};
}

std::string synth_sequence_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth%03d", index);
  return buf;
}

LabelMask synth_labels(const SynthSpec& spec, const std::vector<SquareTrack>& tracks, int t) {
  LabelMask m(spec.size);
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const Pixel p = square_position(tracks[k], spec.motion, spec.size, t);
    for (int y = p.y; y < p.y + tracks[k].side; ++y)
      for (int x = p.x; x < p.x + tracks[k].side; ++x) m.set(x, y, static_cast<ObjectId>(k + 1));
  }
  return m;
}

RgbImage synth_image(const SynthSpec& spec, const std::vector<SquareTrack>& tracks, int seq, int t) {
  const LabelMask labels = synth_labels(spec, tracks, t);
  RgbImage img{spec.size, std::vector<std::uint8_t>(spec.size.area() * 3)};
  // Per-frame noise stream so frames can be rendered independently.
  std::mt19937_64 rng(spec.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(seq * 100003 + t + 1)));
  std::uniform_int_distribution<int> noise(-10, 10);
  const int w = spec.size.width;
  const int h = spec.size.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = spec.size.index(x, y);
      const ObjectId id = labels.labels[i];
      int c[3];
      if (id == 0) {
        c[0] = 70 + 80 * x / w;
        c[1] = 80 + 60 * y / h;
        c[2] = 110;
      } else {
        for (int ch = 0; ch < 3; ++ch) c[ch] = kObjectColours[id - 1][ch];
      }
      for (int ch = 0; ch < 3; ++ch) img.rgb[i * 3 + static_cast<std::size_t>(ch)] =
          static_cast<std::uint8_t>(std::clamp(c[ch] + noise(rng), 0, 255));
    }
  }
  return img;
}

void write_synth_dataset(const SynthSpec& spec, const fs::path& root) {
  const auto tracks = synth_tracks(spec);
  std::error_code ec;
  fs::create_directories(root / "Splits", ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + (root / "Splits").string() + ": " + ec.message());
  std::ofstream split(root / "Splits" / (spec.split + ".txt"), std::ios::trunc);
  if (!split) throw Error(ErrorCode::io, "cannot write split file under " + root.string());
  for (int s = 0; s < spec.sequences; ++s) {
    const std::string name = synth_sequence_name(s);
    fs::create_directories(root / "Images" / name, ec);
    fs::create_directories(root / "Annotations" / name, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create sequence directories for " + name);
    for (int t = 0; t < spec.frames; ++t) {
      const auto& tr = tracks[static_cast<std::size_t>(s)];
      save_label_mask(annotation_path(root, name, t), synth_labels(spec, tr, t));
      save_jpeg(image_path(root, name, t), synth_image(spec, tr, s, t));
    }
    split << name << '\n';
  }
  if (!split) throw Error(ErrorCode::io, "write failed: split file under " + root.string());
}

}  // namespace ivos
