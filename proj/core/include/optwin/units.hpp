#pragma once

#include <cmath>

namespace optwin {

inline constexpr double kPlanckJs = 6.62607015e-34;

// Powers are dBm at module boundaries and watts internally; frequencies are
// THz at module boundaries and Hz internally.

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline double dbm_to_w(double dbm) { return 1e-3 * db_to_linear(dbm); }

inline double w_to_dbm(double w) { return linear_to_db(w / 1e-3); }

inline double thz_to_hz(double thz) { return thz * 1e12; }

inline double hz_to_thz(double hz) { return hz * 1e-12; }

inline double ghz_to_hz(double ghz) { return ghz * 1e9; }

inline double hours_to_min(double h) { return h * 60.0; }

inline double min_to_hours(double m) { return m / 60.0; }

// dB/km attenuation -> power attenuation coefficient in 1/km.
inline double attenuation_to_alpha(double atten_db_per_km) {
  return atten_db_per_km * std::log(10.0) / 10.0;
}

}  // namespace optwin
