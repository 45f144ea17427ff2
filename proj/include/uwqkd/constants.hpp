#pragma once

#include <numbers>

namespace uwqkd::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double planck = 6.62607015e-34;       // J s
inline constexpr double light_speed = 2.99792458e8;    // m/s, vacuum
inline constexpr double deg = pi / 180.0;

}  // namespace uwqkd::constants
