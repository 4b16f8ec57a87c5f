#pragma once

namespace conereg {
inline constexpr const char* kVersion = "1.0.0";
}
