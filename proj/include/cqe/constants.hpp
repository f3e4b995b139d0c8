#pragma once

#include <numbers>

namespace cqe::constants {

// Exact SI values (2019 redefinition).
inline constexpr double e = 1.602176634e-19;    // C
inline constexpr double h = 6.62607015e-34;     // J s
inline constexpr double k_B = 1.380649e-23;     // J / K
inline constexpr double pi = std::numbers::pi;

inline constexpr double hbar = h / (2.0 * pi);  // J s
inline constexpr double Phi0 = h / (2.0 * e);   // Wb, superconducting flux quantum
inline constexpr double R_K = h / (e * e);      // ohm, von Klitzing constant

// Reduced flux quantum Phi0 / 2pi.
inline constexpr double phi0_reduced = Phi0 / (2.0 * pi);

inline constexpr double electron_volt = e;      // J

}  // namespace cqe::constants
