#pragma once

#include <numbers>

namespace tsvqvco::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double mu0 = 4.0e-7 * pi;          // H/m
inline constexpr double boltzmann = 1.380649e-23;   // J/K
inline constexpr double room_temperature = 300.0;   // K
inline constexpr double micron = 1.0e-6;            // m per µm

}  // namespace tsvqvco::constants
