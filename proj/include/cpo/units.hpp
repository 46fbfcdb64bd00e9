#pragma once

#include <numbers>

// Internally every frequency, rate and detuning is an angular frequency in
// rad/s. Ordinary frequencies (Hz, kHz, MHz) appear only at the config/CLI
// boundary and go through these helpers.
namespace cpo::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double from_hz(double hz) { return two_pi * hz; }
constexpr double from_khz(double khz) { return two_pi * 1e3 * khz; }
constexpr double from_mhz(double mhz) { return two_pi * 1e6 * mhz; }

constexpr double to_hz(double rad_per_s) { return rad_per_s / two_pi; }
constexpr double to_khz(double rad_per_s) { return rad_per_s / (two_pi * 1e3); }
constexpr double to_mhz(double rad_per_s) { return rad_per_s / (two_pi * 1e6); }

constexpr double from_us(double us) { return us * 1e-6; }
constexpr double to_us(double s) { return s * 1e6; }

// Field gradients are configured in mG/cm and stored in G/cm.
constexpr double from_mg_per_cm(double mg_per_cm) { return mg_per_cm * 1e-3; }
constexpr double to_mg_per_cm(double g_per_cm) { return g_per_cm * 1e3; }

}  // namespace cpo::units
