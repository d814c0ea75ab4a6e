#pragma once

namespace cod3s {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cod3s
