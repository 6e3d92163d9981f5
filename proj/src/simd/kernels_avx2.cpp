// Compiled with -mavx2; only reached after a CPUID check.
#include "ivos/simd/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)
#include <immintrin.h>

namespace ivos::simd {
namespace {

// Lane-wise nonzero test: 0xFF where the byte is nonzero.
inline __m256i nonzero_bytes(__m256i v) {
  const __m256i zero = _mm256_setzero_si256();
  return _mm256_xor_si256(_mm256_cmpeq_epi8(v, zero), _mm256_set1_epi8(-1));
}

inline std::size_t popcount_mask(__m256i bytes) {
  return static_cast<std::size_t>(
      __builtin_popcount(static_cast<unsigned>(_mm256_movemask_epi8(bytes))));
}

std::size_t count_nonzero(const std::uint8_t* a, std::size_t n) {
  std::size_t i = 0;
  std::size_t c = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    c += popcount_mask(nonzero_bytes(va));
  }
  for (; i < n; ++i) c += a[i] != 0;
  return c;
}

std::size_t count_and(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t i = 0;
  std::size_t c = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = nonzero_bytes(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i)));
    const __m256i vb = nonzero_bytes(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i)));
    c += popcount_mask(_mm256_and_si256(va, vb));
  }
  for (; i < n; ++i) c += (a[i] != 0) && (b[i] != 0);
  return c;
}

std::size_t count_or(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t i = 0;
  std::size_t c = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    c += popcount_mask(nonzero_bytes(_mm256_or_si256(va, vb)));
  }
  for (; i < n; ++i) c += (a[i] != 0) || (b[i] != 0);
  return c;
}

void or_into(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    auto* d = reinterpret_cast<__m256i*>(dst + i);
    const __m256i vs = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(d, _mm256_or_si256(_mm256_loadu_si256(d), vs));
  }
  for (; i < n; ++i) dst[i] = static_cast<std::uint8_t>(dst[i] | src[i]);
}

void andnot_into(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    auto* d = reinterpret_cast<__m256i*>(dst + i);
    const __m256i vs = nonzero_bytes(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i)));
    _mm256_storeu_si256(d, _mm256_andnot_si256(vs, _mm256_loadu_si256(d)));
  }
  for (; i < n; ++i) dst[i] = (src[i] != 0) ? 0 : dst[i];
}

void equal_u8(std::uint8_t* dst, const std::uint8_t* a, std::uint8_t value, std::size_t n) {
  const __m256i target = _mm256_set1_epi8(static_cast<char>(value));
  const __m256i one = _mm256_set1_epi8(1);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i eq = _mm256_and_si256(_mm256_cmpeq_epi8(va, target), one);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), eq);
  }
  for (; i < n; ++i) dst[i] = a[i] == value ? 1 : 0;
}

void axpy_f32(float* y, float a, const float* x, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) {
    const float prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

float dot_f32(const float* a, const float* b, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  alignas(32) float lanes[8];
  _mm256_store_ps(lanes, acc);
  float s = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
            ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable* avx2_table_unchecked() {
  static const KernelTable table{
      "avx2", count_nonzero, count_and, count_or, or_into,
      andnot_into, equal_u8, axpy_f32, dot_f32,
  };
  return &table;
}

}  // namespace ivos::simd

#else

namespace ivos::simd {
const KernelTable* avx2_table_unchecked() { return nullptr; }
}  // namespace ivos::simd

#endif
