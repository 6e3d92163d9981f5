#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ivos/image_io.hpp"
#include "ivos/raster.hpp"

namespace ivos {

/// Per-frame feature vectors on a grid downsampled by `factor`. Frame data
/// is planar: data[t][d * grid.area() + cell], cells row-major.
struct FeatureMap {
  RasterSize image;
  RasterSize grid;
  int factor = 1;
  int dims = 0;
  std::vector<std::vector<float>> data;

  int frames() const { return static_cast<int>(data.size()); }
  const float* plane(int t, int d) const {
    return data[static_cast<std::size_t>(t)].data() + static_cast<std::size_t>(d) * grid.area();
  }
  /// Grid cell covering an image pixel (nearest-neighbour upsampling).
  std::size_t cell_of(int x, int y) const { return grid.index(x / factor, y / factor); }
  void validate() const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

/// Grid size for an image downsampled by factor: ceil(w / f) x ceil(h / f).
RasterSize downsampled(RasterSize image, int factor);

/// (r, g, b) / 255, x / (w - 1), y / (h - 1), t / (T - 1), taking 0/0 as 0.
FeatureMap default_features(std::span<const RgbImage> frames);

/// Binary tensor file, little-endian:
///   "IVFM", u32 frames, u32 dims, u32 factor, u32 image_width,
///   u32 image_height, u32 grid_width, u32 grid_height,
///   then float32 values in [frame][grid_y][grid_x][dim] order.
FeatureMap load_feature_file(const std::filesystem::path& path);
void save_feature_file(const std::filesystem::path& path, const FeatureMap& map);

}  // namespace ivos
