#pragma once

namespace vulcan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vulcan
