#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace promptga {

/// Fixed-length bit vector selecting keywords from a catalog. Bit i selects
/// catalog index i.
class KeywordMask {
 public:
  KeywordMask() = default;
  explicit KeywordMask(std::size_t length) : bits_(length, 0) {}

  static KeywordMask zeros(std::size_t length) { return KeywordMask(length); }
  static KeywordMask ones(std::size_t length);
  static KeywordMask from_indices(std::size_t length, const std::vector<std::size_t>& indices);
  /// Parses a bit string such as "001110" (position 0 first).
  static KeywordMask from_bits(std::string_view bits);
  /// Parses the hex wire form; throws ParseError on malformed input or stray
  /// bits beyond `length`.
  static KeywordMask from_hex(std::string_view hex, std::size_t length);

  std::size_t size() const noexcept { return bits_.size(); }
  bool test(std::size_t i) const { return bits_.at(i) != 0; }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  void set(std::size_t i, bool value = true) { bits_.at(i) = value ? 1 : 0; }
  void flip(std::size_t i) { bits_.at(i) ^= 1; }

  std::size_t popcount() const noexcept;
  std::vector<std::size_t> indices() const;

  /// Lowercase hex of ceil(K/8) bytes; bit 0 is the LSB of byte 0.
  std::string to_hex() const;
  /// "0"/"1" characters, position 0 first.
  std::string to_bits() const;

  /// 0/1 feature row.
  template <typename Scalar = double>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> as_vector() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) v(static_cast<Eigen::Index>(i)) = bits_[i] ? Scalar(1) : Scalar(0);
    return v;
  }

  /// Lexicographic over positions 0..K-1 with clear < set.
  friend auto operator<=>(const KeywordMask&, const KeywordMask&) = default;
  friend bool operator==(const KeywordMask&, const KeywordMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct KeywordMaskHash {
  std::size_t operator()(const KeywordMask& m) const noexcept;
};

}  // namespace promptga
