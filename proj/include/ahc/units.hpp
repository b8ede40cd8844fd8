#pragma once

#include <numbers>

namespace ahc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Configs speak ordinary frequency; everything inside the library is angular.
constexpr double angular(double hz) { return kTwoPi * hz; }
constexpr double hertz(double rad_per_s) { return rad_per_s / kTwoPi; }

}  // namespace ahc
