#pragma once

namespace faasim {
inline constexpr const char* kVersion = "0.1.0";
}
