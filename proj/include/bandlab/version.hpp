#pragma once

namespace bandlab {

inline constexpr const char* kToolName = "bandlab";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace bandlab
