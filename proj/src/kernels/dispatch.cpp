#include <bit>
#include <cstdlib>
#include <string>
#include <vector>

#include "kernels_internal.hpp"
#include "longnav/error.hpp"
#include "longnav/kernels/hamming.hpp"

namespace longnav::kernels {
namespace {

std::vector<HammingKernel> detect_kernels() {
  std::vector<HammingKernel> kernels{{Isa::kScalar, "scalar", &detail::distance_matrix_scalar}};
#if defined(LONGNAV_X86_KERNELS)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt"))
    kernels.push_back({Isa::kAvx2, "avx2", &detail::distance_matrix_avx2});
  if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512vpopcntdq") &&
      __builtin_cpu_supports("popcnt"))
    kernels.push_back({Isa::kAvx512, "avx512", &detail::distance_matrix_avx512});
#endif
#if defined(LONGNAV_NEON_KERNELS)
  kernels.push_back({Isa::kNeon, "neon", &detail::distance_matrix_neon});
#endif
  return kernels;
}

const std::vector<HammingKernel>& kernel_table() {
  static const std::vector<HammingKernel> table = detect_kernels();
  return table;
}

const HammingKernel& choose_kernel() {
  if (const char* forced = std::getenv("LONGNAV_KERNEL"); forced != nullptr && *forced != '\0') {
    if (const HammingKernel* k = find_kernel(forced)) return *k;
    throw ConfigError(std::string("LONGNAV_KERNEL: kernel not available on this CPU: ") + forced);
  }
  return kernel_table().back();
}

}  // namespace

std::span<const HammingKernel> available_kernels() { return kernel_table(); }

const HammingKernel* find_kernel(std::string_view name) {
  for (const HammingKernel& k : kernel_table())
    if (k.name == name) return &k;
  return nullptr;
}

const HammingKernel& active_kernel() {
  static const HammingKernel& chosen = choose_kernel();
  return chosen;
}

void distance_matrix(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                     std::size_t words, std::span<std::uint16_t> out) {
  if (words == 0) throw InvalidInput("distance_matrix: zero-word descriptors");
  if (words * 64 > 65535) throw InvalidInput("distance_matrix: descriptors wider than 65535 bits");
  if (a.size() % words != 0 || b.size() % words != 0)
    throw InvalidInput("distance_matrix: buffer is not a whole number of descriptors");
  const std::size_t rows_a = a.size() / words;
  const std::size_t rows_b = b.size() / words;
  if (out.size() != rows_a * rows_b) throw InvalidInput("distance_matrix: output size mismatch");
  if (rows_a == 0 || rows_b == 0) return;
  active_kernel().distance_matrix(a.data(), rows_a, b.data(), rows_b, words, out.data());
}

std::uint32_t distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) throw InvalidInput("distance: word count mismatch");
  std::uint32_t d = 0;
  for (std::size_t w = 0; w < a.size(); ++w) d += static_cast<std::uint32_t>(std::popcount(a[w] ^ b[w]));
  return d;
}

}  // namespace longnav::kernels
