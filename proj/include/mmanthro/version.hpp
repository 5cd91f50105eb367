#pragma once

namespace mmanthro {
inline constexpr const char* kVersion = "0.1.0";
}
