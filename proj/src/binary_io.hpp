#pragma once

// Little-endian field encoding shared by the embedding and hyperplane files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "cod3s/errors.hpp"

namespace cod3s::detail {

template <typename UInt>
void write_le(std::ostream& out, UInt value) {
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  }
  out.write(bytes, sizeof(UInt));
}

inline void write_f32(std::ostream& out, float value) {
  write_le(out, std::bit_cast<std::uint32_t>(value));
}

template <typename UInt>
UInt read_le(std::istream& in, const std::string& what) {
  unsigned char bytes[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(UInt))) {
    throw FormatError("truncated " + what);
  }
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    value |= static_cast<UInt>(bytes[i]) << (8 * i);
  }
  return value;
}

inline float read_f32(std::istream& in, const std::string& what) {
  return std::bit_cast<float>(read_le<std::uint32_t>(in, what));
}

inline void expect_magic(std::istream& in, const char (&magic)[8],
                         const std::string& file) {
  char got[8];
  if (!in.read(got, 8) || std::memcmp(got, magic, 8) != 0) {
    throw FormatError("bad magic in " + file);
  }
}

}  // namespace cod3s::detail
