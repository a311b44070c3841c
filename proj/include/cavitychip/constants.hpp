#pragma once

namespace cavitychip::constants {

inline constexpr double speed_of_light = 299792458.0;      // m/s
inline constexpr double mu0 = 4e-7 * 3.14159265358979323846; // T m/A
inline constexpr double k_boltzmann = 1.380649e-23;        // J/K
inline constexpr double mu_bohr = 9.2740100783e-24;        // J/T
inline constexpr double pi = 3.14159265358979323846;

// room-temperature copper, used to convert wire current to ohmic heat
inline constexpr double copper_resistivity = 1.7e-8;       // Ohm m

}
