#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cod3s {

/// A packed b-bit LSH code. Bit i lives in byte i/8 at position i%8
/// (least-significant first); pad bits past b-1 are always zero. The textual
/// form is b characters over {'0','1'} with character i = bit i.
class Signature {
 public:
  Signature() = default;
  explicit Signature(std::size_t bits);

  /// Throws ParseError on characters outside {'0','1'} and DomainError on an
  /// empty string.
  static Signature parse(std::string_view text);

  std::size_t bits() const noexcept { return bits_; }
  std::span<const std::uint8_t> bytes() const noexcept { return payload_; }

  bool test(std::size_t i) const;
  void set(std::size_t i, bool value);

  /// First n bits as their own signature; n must be in [1, bits].
  Signature prefix(std::size_t n) const;
  bool starts_with(const Signature& prefix) const;

  std::string to_string() const;

  friend bool operator==(const Signature&, const Signature&) = default;
  /// Orders like the textual forms: bit 0 most significant, shorter first
  /// on a shared prefix.
  friend std::strong_ordering operator<=>(const Signature& a,
                                          const Signature& b);

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint8_t> payload_;
};

/// Number of differing bit positions. Throws DomainError on width mismatch.
std::size_t hamming_distance(const Signature& a, const Signature& b);

struct SignatureHash {
  std::size_t operator()(const Signature& s) const noexcept;
};

}  // namespace cod3s
