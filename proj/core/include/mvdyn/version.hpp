#pragma once

namespace mvdyn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mvdyn
