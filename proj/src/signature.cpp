#include "cod3s/signature.hpp"

#include <bit>

#include "cod3s/errors.hpp"

namespace cod3s {

Signature::Signature(std::size_t bits) : bits_(bits), payload_((bits + 7) / 8) {
  if (bits == 0) throw DomainError("signature width must be positive");
}

Signature Signature::parse(std::string_view text) {
  if (text.empty()) throw DomainError("empty signature string");
  Signature sig(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '0' && c != '1') {
      throw ParseError("signature \"" + std::string(text) +
                       "\" has non-binary character at position " +
                       std::to_string(i));
    }
    if (c == '1') sig.payload_[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return sig;
}

bool Signature::test(std::size_t i) const {
  if (i >= bits_) throw DomainError("bit index out of range");
  return (payload_[i / 8] >> (i % 8)) & 1u;
}

void Signature::set(std::size_t i, bool value) {
  if (i >= bits_) throw DomainError("bit index out of range");
  const auto mask = static_cast<std::uint8_t>(1u << (i % 8));
  if (value) {
    payload_[i / 8] |= mask;
  } else {
    payload_[i / 8] &= static_cast<std::uint8_t>(~mask);
  }
}

Signature Signature::prefix(std::size_t n) const {
  if (n == 0 || n > bits_) {
    throw DomainError("prefix length " + std::to_string(n) +
                      " outside [1, " + std::to_string(bits_) + "]");
  }
  Signature out(n);
  const std::size_t full = n / 8;
  for (std::size_t i = 0; i < full; ++i) out.payload_[i] = payload_[i];
  if (n % 8 != 0) {
    const auto mask = static_cast<std::uint8_t>((1u << (n % 8)) - 1u);
    out.payload_[full] = payload_[full] & mask;
  }
  return out;
}

bool Signature::starts_with(const Signature& p) const {
  if (p.bits_ > bits_ || p.bits_ == 0) return false;
  return prefix(p.bits_) == p;
}

std::string Signature::to_string() const {
  std::string out(bits_, '0');
  for (std::size_t i = 0; i < bits_; ++i) {
    if ((payload_[i / 8] >> (i % 8)) & 1u) out[i] = '1';
  }
  return out;
}

std::strong_ordering operator<=>(const Signature& a, const Signature& b) {
  const std::size_t n = std::min(a.bits_, b.bits_);
  for (std::size_t i = 0; i < n; ++i) {
    const bool x = (a.payload_[i / 8] >> (i % 8)) & 1u;
    const bool y = (b.payload_[i / 8] >> (i % 8)) & 1u;
    if (x != y) return x ? std::strong_ordering::greater
                         : std::strong_ordering::less;
  }
  return a.bits_ <=> b.bits_;
}

std::size_t hamming_distance(const Signature& a, const Signature& b) {
  if (a.bits() != b.bits()) {
    throw DomainError("hamming_distance: width mismatch (" +
                      std::to_string(a.bits()) + " vs " +
                      std::to_string(b.bits()) + ")");
  }
  const auto x = a.bytes();
  const auto y = b.bytes();
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d += static_cast<std::size_t>(
        std::popcount(static_cast<unsigned>(x[i] ^ y[i])));
  }
  return d;
}

std::size_t SignatureHash::operator()(const Signature& s) const noexcept {
  // FNV-1a over the payload, salted with the width.
  std::uint64_t h = 1469598103934665603ull ^ s.bits();
  for (auto byte : s.bytes()) {
    h ^= byte;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

}  // namespace cod3s
