#pragma once

#include <numbers>

namespace mwht::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double c0 = 299792458.0;            // m/s
inline constexpr double mu0 = 4.0e-7 * pi;           // H/m
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);  // F/m
inline constexpr double eta0 = mu0 * c0;             // ohm

inline constexpr double carrier_frequency = 2.5e9;  // Hz
inline constexpr double pulse_bandwidth = 750e6;    // Hz, -3 dB
inline constexpr double blood_temperature = 37.0;   // degC

inline constexpr double h_tissue_air = 5.0;      // W/(m^2 degC)
inline constexpr double h_tissue_water = 300.0;  // W/(m^2 degC)
inline constexpr double water_bath_temperature = 15.0;  // degC
inline constexpr double room_air_temperature = 25.0;    // degC

}  // namespace mwht::constants
