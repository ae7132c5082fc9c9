#pragma once

#include <cstdio>
#include <string>

namespace sctl {

// 15 significant digits, the precision used by every CSV this library writes.
inline std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  return buf;
}

}  // namespace sctl

namespace sctl {

// Shortest-safe round-trip form (17 significant digits).
inline std::string format_exact(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace sctl
