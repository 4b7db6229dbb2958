#include "promptga/mask.hpp"

#include "promptga/errors.hpp"

#include <algorithm>
#include <numeric>

namespace promptga {

KeywordMask KeywordMask::ones(std::size_t length) {
  KeywordMask m(length);
  std::fill(m.bits_.begin(), m.bits_.end(), std::uint8_t{1});
  return m;
}

KeywordMask KeywordMask::from_indices(std::size_t length, const std::vector<std::size_t>& indices) {
  KeywordMask m(length);
  for (auto i : indices) {
    if (i >= length) throw RangeError("mask index " + std::to_string(i) + " out of range");
    m.bits_[i] = 1;
  }
  return m;
}

KeywordMask KeywordMask::from_bits(std::string_view bits) {
  KeywordMask m(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      m.bits_[i] = 1;
    } else if (bits[i] != '0') {
      throw ParseError("invalid bit character in mask string");
    }
  }
  return m;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

KeywordMask KeywordMask::from_hex(std::string_view hex, std::size_t length) {
  const std::size_t n_bytes = (length + 7) / 8;
  if (hex.size() != 2 * n_bytes)
    throw ParseError("mask hex has " + std::to_string(hex.size()) + " characters, expected " +
                     std::to_string(2 * n_bytes));
  KeywordMask m(length);
  for (std::size_t b = 0; b < n_bytes; ++b) {
    const int hi = hex_value(hex[2 * b]);
    const int lo = hex_value(hex[2 * b + 1]);
    if (hi < 0 || lo < 0) throw ParseError("invalid hex digit in mask");
    const unsigned byte = static_cast<unsigned>(hi * 16 + lo);
    for (unsigned bit = 0; bit < 8; ++bit) {
      if (((byte >> bit) & 1u) == 0) continue;
      const std::size_t pos = b * 8 + bit;
      if (pos >= length) throw ParseError("mask hex sets bits beyond its length");
      m.bits_[pos] = 1;
    }
  }
  return m;
}

std::size_t KeywordMask::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> KeywordMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

std::string KeywordMask::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t n_bytes = (size() + 7) / 8;
  std::string out;
  out.reserve(2 * n_bytes);
  for (std::size_t b = 0; b < n_bytes; ++b) {
    unsigned byte = 0;
    for (unsigned bit = 0; bit < 8; ++bit) {
      const std::size_t pos = b * 8 + bit;
      if (pos < size() && bits_[pos]) byte |= 1u << bit;
    }
    out.push_back(kDigits[byte >> 4]);
    out.push_back(kDigits[byte & 0xf]);
  }
  return out;
}

std::string KeywordMask::to_bits() const {
  std::string out(size(), '0');
  for (std::size_t i = 0; i < size(); ++i)
    if (bits_[i]) out[i] = '1';
  return out;
}

std::size_t KeywordMaskHash::operator()(const KeywordMask& m) const noexcept {
  std::size_t h = 1469598103934665603ULL ^ m.size();
  for (std::size_t i = 0; i < m.size(); ++i) h = (h ^ static_cast<std::size_t>(m[i])) * 1099511628211ULL;
  return h;
}

}  // namespace promptga
