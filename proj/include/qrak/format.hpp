#pragma once

// Canonical text form for real values. Every surface that prints numbers —
// expression rendering, the black-box wire protocol, CSV logs — goes through
// format_double so identical runs produce byte-identical files.

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

namespace qrak {

/// Shortest decimal string that round-trips to the same double ("0.1",
/// "2.5e-12", "inf"). Integral values render without an exponent or a
/// trailing ".0" ("3", not "3.0").
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  }
  return std::string(buf, end);
}

}  // namespace qrak
