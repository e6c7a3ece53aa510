#pragma once

namespace driftbench {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace driftbench
