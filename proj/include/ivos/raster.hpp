#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ivos/error.hpp"

namespace ivos {

using ObjectId = std::uint8_t;
inline constexpr int kMaxObjectId = 254;

struct RasterSize {
  int width = 0;
  int height = 0;

  RasterSize() = default;
  RasterSize(int w, int h);

  std::size_t area() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height;
  }

  friend bool operator==(const RasterSize&, const RasterSize&) = default;
};

/// Per-object view of a frame: one byte per pixel, values 0 or 1, row-major.
/// Bytes rather than packed bits so the counting kernels stay branch-free.
struct BinaryMask {
  RasterSize size;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  explicit BinaryMask(RasterSize s) : size(s), bits(s.area(), 0) {}
  BinaryMask(RasterSize s, std::vector<std::uint8_t> b);

  bool at(int x, int y) const { return bits[size.index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { bits[size.index(x, y)] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Multi-object frame raster; 0 is background, k in 1..254 an object id.
struct LabelMask {
  RasterSize size;
  std::vector<std::uint8_t> labels;

  LabelMask() = default;
  explicit LabelMask(RasterSize s) : size(s), labels(s.area(), 0) {}
  LabelMask(RasterSize s, std::vector<std::uint8_t> l);

  std::uint8_t at(int x, int y) const { return labels[size.index(x, y)]; }
  void set(int x, int y, std::uint8_t v) { labels[size.index(x, y)] = v; }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;
};

enum class SeShape { disk, square };

struct StructuringElement {
  SeShape shape = SeShape::disk;
  int radius = 0;

  static StructuringElement disk(int r);
  static StructuringElement square(int r);

  struct Offset {
    int dx;
    int dy;
  };
  /// Offsets in row-major order; disk uses dx^2 + dy^2 <= r^2.
  std::vector<Offset> offsets() const;
  /// Horizontal half-extent of the element on row dy (-1 if the row is empty).
  int half_width(int dy) const;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Ordered 8-connected pixel chain without repeats.
struct PixelPath {
  std::vector<Pixel> points;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Alternating run lengths, row-major, starting with a background run.
struct RleMask {
  RasterSize size;
  std::vector<std::uint32_t> runs;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

}  // namespace ivos
