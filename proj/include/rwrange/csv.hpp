#pragma once

#include <string>

namespace rwrange {

inline constexpr const char* kVersion = "0.1.0";

/// "# rwrange-lab v<version> schema=<schema>"
std::string csv_schema_line(const std::string& schema);

/// Integers (|v| < 2^53) print without exponent or decimals; anything else
/// prints with 17 significant digits so that parsing round-trips exactly.
std::string format_value(double v);

}  // namespace rwrange
