#pragma once

// Data-parallel inner loops behind the mask and classifier code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2 variant. The active table is chosen once at first use from CPUID;
// setting IVOS_SIMD=scalar in the environment forces the reference path.
// Byte kernels operate on 0/1 masks. The float kernels avoid fused
// multiply-add so both variants agree bit for bit, except dot_f32 whose
// reduction order differs.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace ivos::simd {

struct KernelTable {
  std::string_view name;

  std::size_t (*count_nonzero)(const std::uint8_t* a, std::size_t n);
  std::size_t (*count_and)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
  std::size_t (*count_or)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
  // dst[i] |= src[i]
  void (*or_into)(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);
  // dst[i] &= !src[i]
  void (*andnot_into)(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);
  // dst[i] = (a[i] == value)
  void (*equal_u8)(std::uint8_t* dst, const std::uint8_t* a, std::uint8_t value, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy_f32)(float* y, float a, const float* x, std::size_t n);
  float (*dot_f32)(const float* a, const float* b, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the binary or the CPU lacks AVX2.
const KernelTable* avx2_kernels();
/// The table selected for this process.
const KernelTable& active();

}  // namespace ivos::simd
