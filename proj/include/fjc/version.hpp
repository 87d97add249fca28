#pragma once

namespace fjc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fjc
