#pragma once

namespace vibexc {

inline constexpr const char* kVersion = "0.1.0";

namespace constants {

// CODATA 2018 / exact SI values.
inline constexpr double kSpeedOfLight = 2.99792458e8;        // m/s (exact)
inline constexpr double kHbar = 1.054571817e-34;             // J*s
inline constexpr double kAmu = 1.66053906660e-27;            // kg
inline constexpr double kElementaryCharge = 1.602176634e-19; // C (exact)
inline constexpr double kAngstrom = 1e-10;                   // m
inline constexpr double kFemtosecond = 1e-15;                // s
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Vibrational frequencies enter as wavenumbers; dynamics and displacement
// parameters need angular frequency in SI.
inline constexpr double wavenumber_to_angular(double wavenumber_cm) {
  return 2.0 * kPi * kSpeedOfLight * 100.0 * wavenumber_cm; // rad/s
}

} // namespace constants
} // namespace vibexc
