#pragma once

#include <string>

namespace driftbench {

// Shortest representation that round-trips the exact double value.
// All numeric text the workbench emits goes through this, which is what
// makes repeated runs byte-identical.
std::string format_double(double v);

// Writes via a temporary file in the same directory followed by a rename,
// so a killed run never leaves a truncated file that parses as valid.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace driftbench
