#include "rwrange/csv.hpp"

#include <cmath>
#include <cstdio>

namespace rwrange {

std::string csv_schema_line(const std::string& schema) {
  return std::string("# rwrange-lab v") + kVersion + " schema=" + schema;
}

std::string format_value(double v) {
  char buf[40];
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9007199254740992.0) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    if (std::string(buf) == "-0") return "0";
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", v);
  }
  return buf;
}

}  // namespace rwrange
