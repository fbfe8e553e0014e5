#include <bit>

#include "kernels_internal.hpp"

namespace longnav::kernels::detail {

void distance_matrix_scalar(const std::uint64_t* a, std::size_t rows_a, const std::uint64_t* b,
                            std::size_t rows_b, std::size_t words, std::uint16_t* out) {
  for (std::size_t i = 0; i < rows_a; ++i) {
    const std::uint64_t* ai = a + i * words;
    std::uint16_t* row = out + i * rows_b;
    for (std::size_t j = 0; j < rows_b; ++j) {
      const std::uint64_t* bj = b + j * words;
      unsigned d = 0;
      for (std::size_t w = 0; w < words; ++w) d += static_cast<unsigned>(std::popcount(ai[w] ^ bj[w]));
      row[j] = static_cast<std::uint16_t>(d);
    }
  }
}

}  // namespace longnav::kernels::detail
