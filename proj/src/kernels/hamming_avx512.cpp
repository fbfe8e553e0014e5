#include <immintrin.h>

#include "kernels_internal.hpp"

namespace longnav::kernels::detail {

// Requires AVX-512F + VPOPCNTDQ. Rows are processed 8 words at a time with a
// masked tail load, so any word count works.
void distance_matrix_avx512(const std::uint64_t* a, std::size_t rows_a, const std::uint64_t* b,
                            std::size_t rows_b, std::size_t words, std::uint16_t* out) {
  const std::size_t full = words / 8;
  const std::size_t rem = words % 8;
  const __mmask8 tail = static_cast<__mmask8>((1u << rem) - 1u);

  if (words == 4) {
    // Two 256-bit descriptors of b per 512-bit register.
    const __m512i zero = _mm512_setzero_si512();
    for (std::size_t i = 0; i < rows_a; ++i) {
      const __m256i a256 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + 4 * i));
      const __m512i va = _mm512_inserti64x4(_mm512_castsi256_si512(a256), a256, 1);
      std::uint16_t* row = out + i * rows_b;
      std::size_t j = 0;
      for (; j + 2 <= rows_b; j += 2) {
        const __m512i vb = _mm512_loadu_si512(b + 4 * j);
        const __m512i counts = _mm512_popcnt_epi64(_mm512_xor_si512(va, vb));
        row[j] = static_cast<std::uint16_t>(_mm512_mask_reduce_add_epi64(0x0F, counts));
        row[j + 1] = static_cast<std::uint16_t>(_mm512_mask_reduce_add_epi64(0xF0, counts));
      }
      if (j < rows_b) {
        const __m512i vb = _mm512_maskz_loadu_epi64(0x0F, b + 4 * j);
        const __m512i counts = _mm512_popcnt_epi64(_mm512_mask_xor_epi64(zero, 0x0F, va, vb));
        row[j] = static_cast<std::uint16_t>(_mm512_reduce_add_epi64(counts));
      }
    }
    return;
  }

  for (std::size_t i = 0; i < rows_a; ++i) {
    const std::uint64_t* ai = a + i * words;
    std::uint16_t* row = out + i * rows_b;
    for (std::size_t j = 0; j < rows_b; ++j) {
      const std::uint64_t* bj = b + j * words;
      __m512i acc = _mm512_setzero_si512();
      for (std::size_t c = 0; c < full; ++c) {
        const __m512i x = _mm512_xor_si512(_mm512_loadu_si512(ai + 8 * c), _mm512_loadu_si512(bj + 8 * c));
        acc = _mm512_add_epi64(acc, _mm512_popcnt_epi64(x));
      }
      if (rem != 0) {
        const __m512i x = _mm512_xor_si512(_mm512_maskz_loadu_epi64(tail, ai + 8 * full),
                                           _mm512_maskz_loadu_epi64(tail, bj + 8 * full));
        acc = _mm512_add_epi64(acc, _mm512_popcnt_epi64(x));
      }
      row[j] = static_cast<std::uint16_t>(_mm512_reduce_add_epi64(acc));
    }
  }
}

}  // namespace longnav::kernels::detail
