#pragma once

namespace epstein {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace epstein
