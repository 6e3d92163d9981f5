#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ivos/raster.hpp"

namespace ivos {

/// Interleaved 8-bit RGB frame.
struct RgbImage {
  RasterSize size;
  std::vector<std::uint8_t> rgb;

  std::uint8_t channel(int x, int y, int c) const { return rgb[size.index(x, y) * 3 + static_cast<std::size_t>(c)]; }
};

/// Reads an indexed-palette PNG; palette indices become object ids.
LabelMask load_label_mask(const std::filesystem::path& path);
/// Writes an 8-bit palette PNG with a fixed colour map.
void save_label_mask(const std::filesystem::path& path, const LabelMask& mask);

/// JPEG or PNG, chosen by file signature.
RgbImage load_rgb(const std::filesystem::path& path);
void save_jpeg(const std::filesystem::path& path, const RgbImage& image, int quality = 95);

}  // namespace ivos
