#pragma once

#include <charconv>
#include <string>

namespace depembed {

// Shortest decimal representation that round-trips to the same double.
inline std::string fmt_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace depembed
