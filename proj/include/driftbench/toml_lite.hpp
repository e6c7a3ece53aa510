#pragma once

#include <string>

#include <json.hpp>

namespace driftbench {

// Parses the TOML subset used by config files into a JSON tree: [table] and
// [table.sub] headers, key = value pairs with string/integer/float/boolean
// scalars, single-line arrays, and # comments. Multi-line values, dotted
// keys, inline tables, and arrays of tables are rejected with ParseError.
nlohmann::ordered_json parse_toml_lite(const std::string& text);

}  // namespace driftbench
