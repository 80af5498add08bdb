#pragma once

#include <cstdio>
#include <string>

namespace diffspace {

/// printf-style %g formatting with a chosen significant-digit count.
/// Reports use 10 digits; error messages use 17 (round-trip exact).
inline std::string fmt_g(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

/// Hexadecimal float formatting (%a), bit-exact textual form.
inline std::string fmt_hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

}  // namespace diffspace
