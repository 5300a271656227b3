#pragma once

namespace shapepal {

inline constexpr const char* kEngineName = "shapepal";
inline constexpr const char* kVersion = "1.0.0";

}  // namespace shapepal
