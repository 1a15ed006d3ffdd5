#pragma once

namespace rgbuv {
inline constexpr const char* kVersion = "0.1.0";
}
