#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ivos/image_io.hpp"
#include "ivos/raster.hpp"

namespace ivos {

enum class Motion { linear, bounce };

struct SynthSpec {
  int sequences = 2;
  int frames = 10;
  RasterSize size{64, 64};
  int objects = 2;  // 1..3
  Motion motion = Motion::bounce;
  std::uint64_t seed = 7;
  std::string split = "val";

  void validate() const;
};

/// Square of constant side moving inside its own horizontal band, so
/// objects never overlap. Object k (1-based) owns rows
/// [band_top, band_top + band_height).
struct SquareTrack {
  int side = 0;
  int band_top = 0;
  int band_height = 0;
  int x0 = 0;
  int y0 = 0;  // offset inside the band
  int vx = 0;
  int vy = 0;
};

/// Tracks for every (sequence, object), drawn from one mt19937_64 seeded stream.
std::vector<std::vector<SquareTrack>> synth_tracks(const SynthSpec& spec);

/// Top-left corner of the square at frame t. Linear motion is chosen so the
/// square stays inside for all frames; bounce reflects off the band edges.
Pixel square_position(const SquareTrack& track, Motion motion, RasterSize size, int t);

std::string synth_sequence_name(int index);

LabelMask synth_labels(const SynthSpec& spec, const std::vector<SquareTrack>& tracks, int t);
RgbImage synth_image(const SynthSpec& spec, const std::vector<SquareTrack>& tracks, int seq, int t);

/// Writes Images/, Annotations/ and Splits/<split>.txt under root.
void write_synth_dataset(const SynthSpec& spec, const std::filesystem::path& root);

}  // namespace ivos
