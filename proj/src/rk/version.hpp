#pragma once

namespace rk {

inline constexpr const char* kToolName = "readiness-kit";
inline constexpr const char* kVersion = "0.1.0";

} // namespace rk
