#pragma once

// Small line/plan builders shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "optwin/model.hpp"
#include "optwin/qot.hpp"

namespace testfix {

inline optwin::SpectrumGrid default_grid() {
  optwin::SpectrumGrid g;
  g.id = "cband";
  g.anchor_freq_thz = 191.35;
  g.slot_spacing_ghz = 100.0;
  g.slot_count = 48;
  return g;
}

inline optwin::Edfa make_amp(const std::string& id, double gain_db,
                             double noise_figure_db = 5.0,
                             double gain_min = 0.0, double gain_max = 30.0) {
  optwin::Edfa e;
  e.id = id;
  e.gain_db = gain_db;
  e.tilt_db = 0.0;
  e.noise_figure_db = noise_figure_db;
  e.gain_range_db = {gain_min, gain_max};
  e.max_total_output_dbm = 30.0;
  return e;
}

inline optwin::FiberSpan make_span(const std::string& id, double length_km,
                                   double attenuation = 0.2, double beta2 = 21.7,
                                   double gamma = 1.3) {
  optwin::FiberSpan s;
  s.id = id;
  s.length_km = length_km;
  s.attenuation_db_per_km = attenuation;
  s.dispersion_beta2_ps2_km = beta2;
  s.nonlinear_gamma_per_w_km = gamma;
  return s;
}

// n equal spans, transparent amplifiers (gain = span loss), no tilt/ripple.
inline optwin::LineSystem make_line(int spans, double span_km = 56.0,
                                    double attenuation = 0.2, double nf = 5.0) {
  optwin::LineSystem line;
  line.id = "testline";
  line.operator_id = "op";
  line.endpoints = {"tx", "rx"};
  line.grid_id = "cband";
  double gain = span_km * attenuation;
  line.booster = make_amp("booster", gain, nf);
  for (int i = 0; i < spans; ++i) {
    line.spans.push_back(make_span("span" + std::to_string(i), span_km, attenuation));
    if (i + 1 < spans) {
      line.ilas.push_back(make_amp("ila" + std::to_string(i), gain, nf));
    }
  }
  line.preamp = make_amp("preamp", gain, nf);
  line.endpoint_instruments["tx"] = {true, true};
  line.endpoint_instruments["rx"] = {true, true};
  return line;
}

// 46-channel comb (slots 1..46) at one symbol rate and flat launch.
inline optwin::ChannelPlan make_plan(const optwin::SpectrumGrid& grid,
                                     double symbol_rate_gbd = 63.1) {
  optwin::ChannelPlan plan;
  for (int slot = 1; slot + 1 < grid.slot_count; ++slot) {
    optwin::Channel c;
    c.slot_index = slot;
    c.symbol_rate_gbd = symbol_rate_gbd;
    c.role = optwin::ChannelRole::Dummy;
    plan.channels.push_back(c);
  }
  return plan;
}

inline optwin::qot::LineConfig make_config(const optwin::LineSystem& line,
                                           const optwin::ChannelPlan& plan,
                                           double launch_dbm) {
  optwin::qot::LineConfig cfg;
  for (const optwin::Edfa* a : line.amps()) cfg.amps.push_back({a->gain_db, a->tilt_db});
  cfg.launch_dbm.assign(plan.channels.size(), launch_dbm);
  return cfg;
}

}  // namespace testfix
