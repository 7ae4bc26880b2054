#pragma once

#include <cstdio>
#include <string>

namespace acmech {

// fixed 9-significant-digit formatting so identical runs emit identical bytes
inline std::string format_g9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

}  // namespace acmech
