#pragma once

namespace xcoupler {

inline constexpr const char* kToolName = "xcoupler";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace xcoupler
