#pragma once

// Kernel entry points. The SIMD translation units are compiled with extra ISA
// flags, so they must not include standard headers that define inline
// functions shared with the rest of the program.

#include <cstddef>
#include <cstdint>

namespace longnav::kernels::detail {

void distance_matrix_scalar(const std::uint64_t* a, std::size_t rows_a, const std::uint64_t* b,
                            std::size_t rows_b, std::size_t words, std::uint16_t* out);

#if defined(LONGNAV_X86_KERNELS)
void distance_matrix_avx2(const std::uint64_t* a, std::size_t rows_a, const std::uint64_t* b,
                          std::size_t rows_b, std::size_t words, std::uint16_t* out);
void distance_matrix_avx512(const std::uint64_t* a, std::size_t rows_a, const std::uint64_t* b,
                            std::size_t rows_b, std::size_t words, std::uint16_t* out);
#endif

#if defined(LONGNAV_NEON_KERNELS)
void distance_matrix_neon(const std::uint64_t* a, std::size_t rows_a, const std::uint64_t* b,
                          std::size_t rows_b, std::size_t words, std::uint16_t* out);
#endif

}  // namespace longnav::kernels::detail
