#pragma once

#include <cstdio>
#include <string>

namespace rba {

// 17 significant digits: enough for any double to round-trip exactly.
inline std::string g17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace rba
