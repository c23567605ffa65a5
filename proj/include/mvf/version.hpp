#pragma once

namespace mvf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mvf
