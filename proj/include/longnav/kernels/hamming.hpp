#pragma once

// Hamming-distance kernels over packed binary descriptors.
//
// Descriptors are stored row-major as 64-bit words; bits above the descriptor
// width must be zero. Every kernel computes the same all-pairs matrix
//   out[i * rows_b + j] = popcount(a_i XOR b_j)
// and is checked against the scalar reference in tests/unit/kernels_test.cpp.
// The fastest kernel supported by the running CPU is picked on first use;
// LONGNAV_KERNEL=<name> forces a specific one.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace longnav::kernels {

enum class Isa { kScalar, kAvx2, kAvx512, kNeon };

using DistanceMatrixFn = void (*)(const std::uint64_t* a, std::size_t rows_a,
                                  const std::uint64_t* b, std::size_t rows_b,
                                  std::size_t words, std::uint16_t* out);

struct HammingKernel {
  Isa isa;
  std::string_view name;
  DistanceMatrixFn distance_matrix;
};

/// Kernels compiled in and runnable on this CPU, scalar first.
std::span<const HammingKernel> available_kernels();

const HammingKernel& active_kernel();

/// nullptr when the name is unknown or the CPU lacks the instruction set.
const HammingKernel* find_kernel(std::string_view name);

/// Validating front end; dispatches to active_kernel().
void distance_matrix(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                     std::size_t words, std::span<std::uint16_t> out);

std::uint32_t distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

}  // namespace longnav::kernels
