#pragma once

namespace megh {
inline constexpr const char* kVersion = "0.1.0";
}
