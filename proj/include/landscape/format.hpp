#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace landscape {

/// Shortest round-trip decimal rendering of a double. Every number that
/// lands in a CSV or JSON artifact goes through here, so identical values
/// always serialize to identical bytes (the determinism contract).
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string format_int(long long x) { return std::to_string(x); }

}  // namespace landscape
