#include <immintrin.h>

#include "kernels_internal.hpp"

namespace longnav::kernels::detail {
namespace {

// Nibble lookup popcount (Mula et al.); per-byte counts.
inline __m256i popcount_bytes(__m256i v) {
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,  //
                                          0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  return _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
}

inline unsigned horizontal_sum_epi64(__m256i v) {
  __m128i s = _mm_add_epi64(_mm256_castsi256_si128(v), _mm256_extracti128_si256(v, 1));
  s = _mm_add_epi64(s, _mm_unpackhi_epi64(s, s));
  return static_cast<unsigned>(_mm_cvtsi128_si64(s));
}

// Byte lanes saturate after 255/8 = 31 accumulated 256-bit blocks.
constexpr std::size_t kMaxByteBlocks = 31;

unsigned pair_distance(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  const std::size_t blocks = words / 4;
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc = zero;
  std::size_t c = 0;
  while (c < blocks) {
    const std::size_t end = (blocks - c > kMaxByteBlocks) ? c + kMaxByteBlocks : blocks;
    __m256i bytes = zero;
    for (; c < end; ++c) {
      const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + 4 * c));
      const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + 4 * c));
      bytes = _mm256_add_epi8(bytes, popcount_bytes(_mm256_xor_si256(va, vb)));
    }
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(bytes, zero));
  }
  unsigned d = horizontal_sum_epi64(acc);
  for (std::size_t w = 4 * blocks; w < words; ++w)
    d += static_cast<unsigned>(_mm_popcnt_u64(a[w] ^ b[w]));
  return d;
}

}  // namespace

void distance_matrix_avx2(const std::uint64_t* a, std::size_t rows_a, const std::uint64_t* b,
                          std::size_t rows_b, std::size_t words, std::uint16_t* out) {
  if (words == 4) {
    // 256-bit descriptors: one register per row, hoisted out of the inner loop.
    const __m256i zero = _mm256_setzero_si256();
    for (std::size_t i = 0; i < rows_a; ++i) {
      const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + 4 * i));
      std::uint16_t* row = out + i * rows_b;
      for (std::size_t j = 0; j < rows_b; ++j) {
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + 4 * j));
        const __m256i sums = _mm256_sad_epu8(popcount_bytes(_mm256_xor_si256(va, vb)), zero);
        row[j] = static_cast<std::uint16_t>(horizontal_sum_epi64(sums));
      }
    }
    return;
  }
  for (std::size_t i = 0; i < rows_a; ++i) {
    const std::uint64_t* ai = a + i * words;
    std::uint16_t* row = out + i * rows_b;
    for (std::size_t j = 0; j < rows_b; ++j)
      row[j] = static_cast<std::uint16_t>(pair_distance(ai, b + j * words, words));
  }
}

}  // namespace longnav::kernels::detail
