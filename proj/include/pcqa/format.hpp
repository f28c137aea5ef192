#pragma once

#include <charconv>
#include <string>

namespace pcqa {

/// Shortest decimal form that parses back to the identical double; keeps
/// serialized reports and PLY text byte-stable across runs.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace pcqa
