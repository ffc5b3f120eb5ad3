#pragma once

namespace gawq {
inline constexpr const char* kVersion = "0.1.0";
}
