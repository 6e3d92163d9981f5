#include "ivos/simd/kernels.hpp"

namespace ivos::simd {
namespace {

std::size_t count_nonzero(const std::uint8_t* a, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += a[i] != 0;
  return c;
}

std::size_t count_and(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += (a[i] != 0) && (b[i] != 0);
  return c;
}

std::size_t count_or(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += (a[i] != 0) || (b[i] != 0);
  return c;
}

void or_into(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<std::uint8_t>(dst[i] | src[i]);
}

void andnot_into(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = (src[i] != 0) ? 0 : dst[i];
}

void equal_u8(std::uint8_t* dst, const std::uint8_t* a, std::uint8_t value, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] == value ? 1 : 0;
}

void axpy_f32(float* y, float a, const float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

float dot_f32(const float* a, const float* b, std::size_t n) {
  float s = 0.0f;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar", count_nonzero, count_and, count_or, or_into,
      andnot_into, equal_u8, axpy_f32, dot_f32,
  };
  return table;
}

}  // namespace ivos::simd
