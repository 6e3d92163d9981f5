#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ivos/raster.hpp"

namespace ivos {

enum class Connectivity { four = 4, eight = 8 };

struct Component {
  BinaryMask mask;
  std::size_t area = 0;
  std::size_t first_index = 0;  // row-major index of the component's first pixel
};

/// Bit set iff label equals id. An absent id yields an empty mask.
BinaryMask extract_object(const LabelMask& mask, ObjectId id);

/// Components ordered by decreasing area, ties by first pixel in row-major order.
std::vector<Component> connected_components(const BinaryMask& mask, Connectivity conn);

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);

/// Topology-preserving thinning to a unit-width 8-connected skeleton.
///
/// Each pass visits the north, south, east and west border pixels in turn.
/// A sub-pass collects its border pixels first, then examines them in
/// row-major order, deleting each immediately when it is simple (8-connected foreground, 4-connected
/// background) and have at least two foreground neighbours. Passes repeat
/// until nothing changes. Remaining 2x2 foreground blocks are then broken
/// while keeping foreground connectivity; at crossings of two digital lines
/// the shortest detached branch is dropped with the block pixel. The number
/// of 8-connected components never changes.
BinaryMask skeletonize(const BinaryMask& mask);

/// Foreground pixels 4-adjacent to background or to the image border.
BinaryMask boundary(const BinaryMask& mask);

RleMask rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const RleMask& rle);

/// Bresenham pixels from a to b inclusive, walking from a.
std::vector<Pixel> bresenham(Pixel a, Pixel b);

/// Maps a normalized coordinate onto the pixel grid: round(x * (w - 1)).
Pixel to_pixel(Point2 p, RasterSize size);
Point2 to_normalized(Pixel p, RasterSize size);

/// Renders the polyline with Bresenham segments, then dilates by disk(thickness - 1).
BinaryMask rasterize_polyline(std::span<const Point2> points, RasterSize size, int thickness = 1);

/// a ⊆ b
bool is_subset(const BinaryMask& a, const BinaryMask& b);

}  // namespace ivos
