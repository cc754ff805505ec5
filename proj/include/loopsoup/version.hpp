#pragma once

namespace loopsoup {

inline constexpr const char* kToolName = "loopsoup";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace loopsoup
