#pragma once

namespace epipanel {

inline constexpr const char* kVersion = "0.1.0";

}
