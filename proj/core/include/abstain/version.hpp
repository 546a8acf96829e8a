#pragma once

namespace abstain {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace abstain
