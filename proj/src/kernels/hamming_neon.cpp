#include <arm_neon.h>

#include "kernels_internal.hpp"

namespace longnav::kernels::detail {

// AArch64 only (vaddvq_u8). A 128-bit chunk has at most 128 set bits, which
// fits the u8 horizontal sum.
void distance_matrix_neon(const std::uint64_t* a, std::size_t rows_a, const std::uint64_t* b,
                          std::size_t rows_b, std::size_t words, std::uint16_t* out) {
  for (std::size_t i = 0; i < rows_a; ++i) {
    const std::uint64_t* ai = a + i * words;
    std::uint16_t* row = out + i * rows_b;
    for (std::size_t j = 0; j < rows_b; ++j) {
      const std::uint64_t* bj = b + j * words;
      unsigned d = 0;
      std::size_t w = 0;
      for (; w + 2 <= words; w += 2) {
        const uint64x2_t x = veorq_u64(vld1q_u64(ai + w), vld1q_u64(bj + w));
        d += vaddvq_u8(vcntq_u8(vreinterpretq_u8_u64(x)));
      }
      if (w < words) d += vaddv_u8(vcnt_u8(vcreate_u8(ai[w] ^ bj[w])));
      row[j] = static_cast<std::uint16_t>(d);
    }
  }
}

}  // namespace longnav::kernels::detail
