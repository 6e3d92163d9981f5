#include "ivos/raster.hpp"

#include <cstdlib>
#include <limits>
#include <string>

#include "ivos/simd/kernels.hpp"

namespace ivos {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::size_mismatch: return "size_mismatch";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::auth: return "auth";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::phase: return "phase";
    case ErrorCode::quota: return "quota";
    case ErrorCode::busy: return "busy";
  }
  return "unknown";
}

RasterSize::RasterSize(int w, int h) : width(w), height(h) {
  if (w < 1 || h < 1) {
    throw Error(ErrorCode::invalid_argument,
                "raster dimensions must be positive, got " + std::to_string(w) + "x" +
                    std::to_string(h));
  }
  const auto limit = static_cast<long long>(std::numeric_limits<int>::max()) + 1;  // 2^31
  if (static_cast<long long>(w) * static_cast<long long>(h) > limit) {
    throw Error(ErrorCode::invalid_argument, "raster larger than 2^31 pixels");
  }
}

BinaryMask::BinaryMask(RasterSize s, std::vector<std::uint8_t> b) : size(s), bits(std::move(b)) {
  if (bits.size() != size.area()) {
    throw Error(ErrorCode::size_mismatch, "binary mask data does not match raster size");
  }
  for (auto& v : bits) v = v != 0 ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return simd::active().count_nonzero(bits.data(), bits.size());
}

LabelMask::LabelMask(RasterSize s, std::vector<std::uint8_t> l) : size(s), labels(std::move(l)) {
  if (labels.size() != size.area()) {
    throw Error(ErrorCode::size_mismatch, "label mask data does not match raster size");
  }
  for (auto v : labels) {
    if (v > kMaxObjectId) {
      throw Error(ErrorCode::format, "label " + std::to_string(v) + " exceeds 254");
    }
  }
}

StructuringElement StructuringElement::disk(int r) {
  if (r < 0) throw Error(ErrorCode::invalid_argument, "structuring element radius must be >= 0");
  return {SeShape::disk, r};
}

StructuringElement StructuringElement::square(int r) {
  if (r < 0) throw Error(ErrorCode::invalid_argument, "structuring element radius must be >= 0");
  return {SeShape::square, r};
}

int StructuringElement::half_width(int dy) const {
  if (std::abs(dy) > radius) return -1;
  if (shape == SeShape::square) return radius;
  int w = 0;
  while ((w + 1) * (w + 1) + dy * dy <= radius * radius) ++w;
  return w;
}

std::vector<StructuringElement::Offset> StructuringElement::offsets() const {
  std::vector<Offset> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    const int hw = half_width(dy);
    for (int dx = -hw; dx <= hw; ++dx) out.push_back({dx, dy});
  }
  return out;
}

}  // namespace ivos
