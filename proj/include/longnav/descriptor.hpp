#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "longnav/rng.hpp"

namespace longnav {

inline constexpr std::size_t kDefaultDescriptorWidth = 256;

/// Fixed-width binary descriptor (a stand-in for BRIEF). Bit i lives in word
/// i / 64 at position i % 64; bits past the width are kept at zero.
class Descriptor {
 public:
  Descriptor() = default;
  explicit Descriptor(std::size_t width_bits);

  /// Lowercase or uppercase hex, most significant nibble first; width = 4 * length.
  static Descriptor from_hex(std::string_view hex);
  /// '0'/'1' characters, most significant bit first.
  static Descriptor from_bits(std::string_view bits);
  static Descriptor random(std::size_t width_bits, Rng& rng);

  std::size_t width() const { return width_; }
  std::span<const std::uint64_t> words() const { return words_; }

  bool bit(std::size_t i) const;
  void set_bit(std::size_t i, bool value);
  void flip(std::size_t i);
  Descriptor complement() const;

  /// width / 4 lowercase hex characters; width must be a multiple of 4.
  std::string to_hex() const;

  friend bool operator==(const Descriptor&, const Descriptor&) = default;

 private:
  void clear_padding();

  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Number of differing bits. Throws InvalidInput on width mismatch.
std::uint32_t hamming_distance(const Descriptor& a, const Descriptor& b);

/// Contiguous row-major copy of equally wide descriptors, the layout the
/// distance kernels consume.
class DescriptorBlock {
 public:
  explicit DescriptorBlock(std::size_t width_bits);

  void reserve(std::size_t rows) { data_.reserve(rows * words_per_row_); }
  void append(const Descriptor& d);

  std::size_t rows() const { return rows_; }
  std::size_t width() const { return width_; }
  std::size_t words_per_row() const { return words_per_row_; }
  std::span<const std::uint64_t> data() const { return data_; }

 private:
  std::size_t width_;
  std::size_t words_per_row_;
  std::size_t rows_ = 0;
  std::vector<std::uint64_t> data_;
};

/// All-pairs distances, row-major a.rows() x b.rows().
std::vector<std::uint16_t> distance_matrix(const DescriptorBlock& a, const DescriptorBlock& b);

}  // namespace longnav
