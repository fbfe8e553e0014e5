#include "longnav/descriptor.hpp"

#include <bit>

#include "longnav/error.hpp"
#include "longnav/kernels/hamming.hpp"

namespace longnav {
namespace {

std::size_t word_count(std::size_t width_bits) { return (width_bits + 63) / 64; }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Descriptor::Descriptor(std::size_t width_bits) : width_(width_bits), words_(word_count(width_bits), 0) {
  if (width_bits == 0) throw InvalidInput("descriptor width must be positive");
}

Descriptor Descriptor::from_hex(std::string_view hex) {
  if (hex.empty()) throw InvalidInput("empty hex descriptor");
  Descriptor d(hex.size() * 4);
  for (std::size_t j = 0; j < hex.size(); ++j) {
    const int v = hex_value(hex[j]);
    if (v < 0) throw InvalidInput("invalid hex digit in descriptor: " + std::string(hex));
    const std::size_t low_bit = d.width_ - 4 * (j + 1);
    for (int b = 0; b < 4; ++b)
      if ((v >> b) & 1) d.set_bit(low_bit + static_cast<std::size_t>(b), true);
  }
  return d;
}

Descriptor Descriptor::from_bits(std::string_view bits) {
  if (bits.empty()) throw InvalidInput("empty bit string");
  Descriptor d(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] != '0' && bits[j] != '1') throw InvalidInput("invalid bit character");
    if (bits[j] == '1') d.set_bit(bits.size() - 1 - j, true);
  }
  return d;
}

Descriptor Descriptor::random(std::size_t width_bits, Rng& rng) {
  Descriptor d(width_bits);
  for (auto& w : d.words_) w = rng();
  d.clear_padding();
  return d;
}

bool Descriptor::bit(std::size_t i) const {
  if (i >= width_) throw OutOfRange("descriptor bit index out of range");
  return (words_[i / 64] >> (i % 64)) & 1u;
}

void Descriptor::set_bit(std::size_t i, bool value) {
  if (i >= width_) throw OutOfRange("descriptor bit index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (value)
    words_[i / 64] |= mask;
  else
    words_[i / 64] &= ~mask;
}

void Descriptor::flip(std::size_t i) {
  if (i >= width_) throw OutOfRange("descriptor bit index out of range");
  words_[i / 64] ^= std::uint64_t{1} << (i % 64);
}

Descriptor Descriptor::complement() const {
  Descriptor d = *this;
  for (auto& w : d.words_) w = ~w;
  d.clear_padding();
  return d;
}

std::string Descriptor::to_hex() const {
  if (width_ % 4 != 0) throw InvalidInput("hex encoding needs a width divisible by 4");
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(width_ / 4, '0');
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t low_bit = width_ - 4 * (j + 1);
    const auto nibble = (words_[low_bit / 64] >> (low_bit % 64)) & 0xFu;
    out[j] = kDigits[nibble];
  }
  return out;
}

void Descriptor::clear_padding() {
  if (width_ % 64 != 0) words_.back() &= (std::uint64_t{1} << (width_ % 64)) - 1;
}

std::uint32_t hamming_distance(const Descriptor& a, const Descriptor& b) {
  if (a.width() != b.width())
    throw InvalidInput("hamming_distance: width mismatch (" + std::to_string(a.width()) + " vs " +
                       std::to_string(b.width()) + ")");
  return kernels::distance(a.words(), b.words());
}

DescriptorBlock::DescriptorBlock(std::size_t width_bits)
    : width_(width_bits), words_per_row_(word_count(width_bits)) {
  if (width_bits == 0) throw InvalidInput("descriptor width must be positive");
}

void DescriptorBlock::append(const Descriptor& d) {
  if (d.width() != width_)
    throw InvalidInput("descriptor width mismatch (" + std::to_string(d.width()) + " vs " +
                       std::to_string(width_) + ")");
  data_.insert(data_.end(), d.words().begin(), d.words().end());
  ++rows_;
}

std::vector<std::uint16_t> distance_matrix(const DescriptorBlock& a, const DescriptorBlock& b) {
  if (a.width() != b.width()) throw InvalidInput("distance_matrix: width mismatch");
  std::vector<std::uint16_t> out(a.rows() * b.rows());
  kernels::distance_matrix(a.data(), b.data(), a.words_per_row(), out);
  return out;
}

}  // namespace longnav
