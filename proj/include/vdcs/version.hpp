#pragma once

namespace vdcs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vdcs
