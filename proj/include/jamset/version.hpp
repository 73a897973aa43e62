#pragma once

namespace jamset {
inline constexpr const char* kVersion = "0.1.0";
}
