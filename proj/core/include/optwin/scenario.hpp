#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optwin/model.hpp"

namespace optwin {

// Parses and cross-checks a scenario document (UTF-8 JSON). Throws Error with
// kind Schema (shape), Reference (dangling id) or Invariant (violated bound).
Scenario validate_scenario(const std::string& json_text);

// Canonical JSON for a scenario; validate_scenario(serialize_scenario(s))
// round-trips to an equal scenario.
std::string serialize_scenario(const Scenario& s);

bool scenarios_equal(const Scenario& a, const Scenario& b);

// Reference dual-operator recovery drill: a 5 x 56 km long-haul line with
// four ILAs plus a 50 km metro line, two operators, twelve delegable
// transceiver ports and a 25 GB database stranded on generator power.
struct ReferenceScenarioOptions {
  std::uint64_t seed = 42;
  double fuel_hours = 8.0;
  bool fuel_override = false;
  int span_count = 5;
  double span_length_km = 56.0;
  double attenuation_db_per_km = 0.2;
  double dispersion_beta2_ps2_km = 21.7;
  double nonlinear_gamma_per_w_km = 1.3;
  double amp_gain_db = 11.2;                 // nominal = span loss
  double amp_noise_figure_db = 5.0;          // per-amp truth drawn near this
  double nf_spread_db = 0.8;                 // uniform half-width around nominal
  double ripple_sigma_db = 0.08;             // random per-slot component
  double ripple_linear_max_db = 0.3;         // per-amp linear component amplitude
  double gain_range_min_db = 5.0;
  double gain_range_max_db = 18.0;
  double max_total_output_dbm = 23.0;
  double trx_snr_800g_db = 21.0;
  double trx_snr_400g_db = 24.0;
  double initial_launch_dbm = -11.2;         // per channel, before booster
  // Lumped losses as (span index, position within span km, loss dB); the
  // default scenario carries one 0.8 dB splice on span 1.
  std::vector<std::tuple<int, double, double>> extra_losses = {{1, 20.0, 0.8}};
};

Scenario make_reference_scenario(const ReferenceScenarioOptions& opts = {});

// The flat comb the line carries before traffic is provisioned: dummy
// channels in every slot except the two reserved edge measurement slots.
ChannelPlan make_comb_plan(const SpectrumGrid& grid, double launch_dbm,
                           double dummy_symbol_rate_gbd = 50.0);

}  // namespace optwin
