#include "optwin/qot.hpp"

#include <algorithm>
#include <cmath>

namespace optwin::qot {

double effective_length_km(double attenuation_db_per_km, double length_km) {
  if (attenuation_db_per_km < 0.0 || length_km < 0.0) {
    raise(ErrorKind::Domain, "effective_length: negative attenuation or length");
  }
  double alpha = attenuation_to_alpha(attenuation_db_per_km);  // 1/km
  if (alpha * length_km < 1e-12) return length_km;             // lossless limit
  return (1.0 - std::exp(-alpha * length_km)) / alpha;
}

double ase_power_w(double gain_db, double noise_figure_db, double carrier_hz,
                   double ref_bandwidth_hz) {
  if (gain_db < 0.0) raise(ErrorKind::Domain, "ase_power: gain below 0 dB");
  return db_to_linear(noise_figure_db) * kPlanckJs * carrier_hz *
         (db_to_linear(gain_db) - 1.0) * ref_bandwidth_hz;
}

double nli_psd_per_span(const FiberSpan& span, double wdm_psd_w_per_hz,
                        double total_bandwidth_hz) {
  if (std::abs(span.dispersion_beta2_ps2_km) < kMinBeta2Ps2Km) {
    raise(ErrorKind::ModelDomain,
          "nli_psd_per_span: |beta2| below " + std::to_string(kMinBeta2Ps2Km) +
              " ps^2/km in span " + span.id + "; closed form is singular");
  }
  double leff_m = effective_length_km(span.attenuation_db_per_km, span.length_km) * 1e3;
  double alpha_per_m = attenuation_to_alpha(span.attenuation_db_per_km) / 1e3;
  double leff_asym_m = 1.0 / alpha_per_m;
  double beta2 = std::abs(span.dispersion_beta2_ps2_km) * 1e-27;  // s^2/m
  double gamma = span.nonlinear_gamma_per_w_km * 1e-3;            // 1/(W m)
  double arg = (M_PI * M_PI / 2.0) * beta2 * leff_asym_m * total_bandwidth_hz *
               total_bandwidth_hz;
  return (8.0 / 27.0) * gamma * gamma * leff_m * leff_m * wdm_psd_w_per_hz *
         wdm_psd_w_per_hz * wdm_psd_w_per_hz * std::asinh(arg) /
         (M_PI * beta2 * leff_asym_m);
}

double combine_with_transceiver(double gsnr_db, double snr_trx_db) {
  if (std::isinf(snr_trx_db) && snr_trx_db > 0.0) return gsnr_db;
  if (std::isinf(gsnr_db) && gsnr_db > 0.0) return snr_trx_db;
  if (!std::isfinite(gsnr_db) || !std::isfinite(snr_trx_db)) {
    raise(ErrorKind::Domain, "combine_with_transceiver: non-finite input");
  }
  double inv = 1.0 / db_to_linear(gsnr_db) + 1.0 / db_to_linear(snr_trx_db);
  return -linear_to_db(inv);
}

double ber_from_gsnr(const ModulationFormat& format, double gsnr_db) {
  if (!std::isfinite(gsnr_db)) raise(ErrorKind::Domain, "ber_from_gsnr: non-finite GSNR");
  double snr = db_to_linear(gsnr_db);
  if (format.ber_curve == "dp-qpsk") {
    return 0.5 * std::erfc(std::sqrt(snr / 2.0));
  }
  if (format.ber_curve == "dp-16qam") {
    return (3.0 / 8.0) * std::erfc(std::sqrt(snr / 10.0));
  }
  raise(ErrorKind::Domain, "ber_from_gsnr: unknown ber_curve \"" + format.ber_curve + "\"");
}

double required_gsnr_db(const ModulationFormat& format, double fec_limit) {
  if (fec_limit <= 0.0 || fec_limit >= 0.5) {
    raise(ErrorKind::Domain, "required_gsnr: fec_limit must lie in (0, 0.5)");
  }
  double lo = -10.0, hi = kGsnrCapDb;
  if (ber_from_gsnr(format, lo) < fec_limit) {
    raise(ErrorKind::Domain, "required_gsnr: fec_limit not bracketable for " + format.id);
  }
  // bisect well past the 0.01 dB contract so the BER inverse holds to 1e-4
  while (hi - lo > 1e-6) {
    double mid = 0.5 * (lo + hi);
    if (ber_from_gsnr(format, mid) > fec_limit) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

double amp_slot_gain_db(const Edfa& amp, const AmpSetting& setting,
                        const SpectrumGrid& grid, int slot) {
  return setting.gain_db + setting.tilt_db * grid.normalized_freq(grid.carrier_hz(slot)) +
         amp.ripple_at(slot);
}

double amp_channel_gain_db(const Edfa& amp, const AmpSetting& setting,
                           const SpectrumGrid& grid, const Channel& channel) {
  double ripple = 0.0;
  for (int s = channel.slot_index; s <= channel.last_slot(); ++s) {
    ripple += amp.ripple_at(s);
  }
  ripple /= static_cast<double>(channel.width_slots);
  return setting.gain_db +
         setting.tilt_db * grid.normalized_freq(channel.center_freq_hz(grid)) + ripple;
}

std::vector<WalkElement> line_elements(const LineSystem& line) {
  std::vector<WalkElement> elements;
  elements.push_back(WalkAmp{&line.booster});
  for (size_t i = 0; i < line.spans.size(); ++i) {
    elements.push_back(WalkSpan{&line.spans[i]});
    if (i + 1 < line.spans.size()) elements.push_back(WalkAmp{&line.ilas[i]});
  }
  elements.push_back(WalkAmp{&line.preamp});
  return elements;
}

namespace {

struct WalkState {
  std::vector<double> channel_sig_w;  // per plan channel
  std::vector<double> slot_ase_psd;   // per grid slot
  std::vector<double> slot_nli_psd;
};

double cap_db(double lin_ratio) {
  if (lin_ratio <= 0.0 || !std::isfinite(lin_ratio)) return kGsnrCapDb;
  return std::min(kGsnrCapDb, linear_to_db(lin_ratio));
}

double plan_total_w(const WalkState& st, const SpectrumGrid& grid) {
  double total = 0.0;
  for (double w : st.channel_sig_w) total += w;
  double spacing = ghz_to_hz(grid.slot_spacing_ghz);
  for (size_t s = 0; s < st.slot_ase_psd.size(); ++s) {
    total += (st.slot_ase_psd[s] + st.slot_nli_psd[s]) * spacing;
  }
  return total;
}

}  // namespace

PropagationResult propagate_walk(const std::vector<WalkElement>& elements,
                                 const SpectrumGrid& grid, const LineConfig& config,
                                 const ChannelPlan& plan) {
  size_t amp_count = 0;
  for (const auto& e : elements) {
    if (std::holds_alternative<WalkAmp>(e)) ++amp_count;
  }
  if (config.amps.size() != amp_count) {
    raise(ErrorKind::Domain, "line config has " + std::to_string(config.amps.size()) +
                                 " amp settings for " + std::to_string(amp_count) +
                                 " amplifiers");
  }
  if (config.launch_dbm.size() != plan.channels.size()) {
    raise(ErrorKind::Domain, "launch power vector does not match channel plan");
  }
  for (const auto& c : plan.channels) {
    if (c.slot_index < 0 || c.last_slot() >= grid.slot_count) {
      raise(ErrorKind::Domain, "channel at slot " + std::to_string(c.slot_index) +
                                   " does not fit the grid");
    }
  }

  WalkState st;
  st.channel_sig_w.resize(plan.channels.size());
  st.slot_ase_psd.assign(static_cast<size_t>(grid.slot_count), 0.0);
  st.slot_nli_psd.assign(static_cast<size_t>(grid.slot_count), 0.0);
  for (size_t i = 0; i < plan.channels.size(); ++i) {
    st.channel_sig_w[i] = dbm_to_w(config.launch_dbm[i]);
  }

  PropagationResult result;
  size_t amp_index = 0;
  for (const auto& element : elements) {
    if (const auto* wa = std::get_if<WalkAmp>(&element)) {
      const Edfa& amp = *wa->amp;
      const AmpSetting& setting = config.amps[amp_index];

      double input_w = plan_total_w(st, grid);
      for (size_t i = 0; i < plan.channels.size(); ++i) {
        double p_dbm = w_to_dbm(std::max(st.channel_sig_w[i], 1e-30));
        if (p_dbm < kLossOfSignalDbm) {
          raise(ErrorKind::LossOfSignal,
                "loss of signal at input of " + amp.id + ": channel in slot " +
                    std::to_string(plan.channels[i].slot_index) + " at " +
                    std::to_string(p_dbm) + " dBm");
        }
        double g = db_to_linear(amp_channel_gain_db(amp, setting, grid, plan.channels[i]));
        st.channel_sig_w[i] *= g;
      }
      for (int s = 0; s < grid.slot_count; ++s) {
        double g_db = amp_slot_gain_db(amp, setting, grid, s);
        double g = db_to_linear(g_db);
        auto idx = static_cast<size_t>(s);
        st.slot_ase_psd[idx] *= g;
        st.slot_nli_psd[idx] *= g;
        st.slot_ase_psd[idx] +=
            db_to_linear(amp.noise_figure_db) * kPlanckJs * grid.carrier_hz(s) * (g - 1.0);
      }

      AmpTap tap;
      tap.element_id = amp.id;
      tap.total_input_dbm = w_to_dbm(std::max(input_w, 1e-30));
      tap.total_output_dbm = w_to_dbm(std::max(plan_total_w(st, grid), 1e-30));
      tap.slot_signal_w.assign(static_cast<size_t>(grid.slot_count), 0.0);
      for (size_t i = 0; i < plan.channels.size(); ++i) {
        const Channel& c = plan.channels[i];
        for (int s = c.slot_index; s <= c.last_slot(); ++s) {
          tap.slot_signal_w[static_cast<size_t>(s)] =
              st.channel_sig_w[i] / c.width_slots;
        }
      }
      tap.slot_ase_psd = st.slot_ase_psd;
      tap.slot_nli_psd = st.slot_nli_psd;
      tap.gsnr.reference_element = static_cast<int>(amp_index);
      tap.gsnr.element_id = amp.id;
      for (size_t i = 0; i < plan.channels.size(); ++i) {
        const Channel& c = plan.channels[i];
        double ase_psd = 0.0, nli_psd = 0.0;
        for (int s = c.slot_index; s <= c.last_slot(); ++s) {
          ase_psd += st.slot_ase_psd[static_cast<size_t>(s)];
          nli_psd += st.slot_nli_psd[static_cast<size_t>(s)];
        }
        ase_psd /= c.width_slots;
        nli_psd /= c.width_slots;
        double bw = c.symbol_rate_hz();
        ChannelGsnr g;
        g.slot_index = c.slot_index;
        g.ref_bandwidth_hz = bw;
        double sig = st.channel_sig_w[i];
        g.snr_ase_db = cap_db(ase_psd > 0.0 ? sig / (ase_psd * bw) : -1.0);
        g.snr_nli_db = cap_db(nli_psd > 0.0 ? sig / (nli_psd * bw) : -1.0);
        double inv = (ase_psd + nli_psd) * bw;
        g.gsnr_db = cap_db(inv > 0.0 ? sig / inv : -1.0);
        tap.gsnr.channels.push_back(g);
      }
      result.taps.push_back(std::move(tap));
      ++amp_index;
    } else {
      const FiberSpan& span = *std::get<WalkSpan>(element).span;
      double wdm_psd = 0.0;
      for (double w : st.channel_sig_w) wdm_psd += w;
      wdm_psd /= grid.band_width_hz();
      double g_nli = wdm_psd > 0.0 ? nli_psd_per_span(span, wdm_psd, grid.band_width_hz())
                                   : 0.0;
      double t = db_to_linear(-span.total_loss_db());
      for (double& w : st.channel_sig_w) w *= t;
      for (int s = 0; s < grid.slot_count; ++s) {
        auto idx = static_cast<size_t>(s);
        st.slot_nli_psd[idx] = (st.slot_nli_psd[idx] + g_nli) * t;
        st.slot_ase_psd[idx] *= t;
      }
    }
  }
  return result;
}

void validate_config(const LineSystem& line, const SpectrumGrid& grid,
                     const LineConfig& config, const ChannelPlan& plan) {
  auto amps = line.amps();
  if (config.amps.size() != amps.size()) {
    raise(ErrorKind::Domain, "config amp count mismatch for line " + line.id);
  }
  for (size_t i = 0; i < amps.size(); ++i) {
    const auto& range = amps[i]->gain_range_db;
    if (config.amps[i].gain_db < range[0] - 1e-9 ||
        config.amps[i].gain_db > range[1] + 1e-9) {
      raise(ErrorKind::Invariant, "gain " + std::to_string(config.amps[i].gain_db) +
                                      " dB outside range of " + amps[i]->id);
    }
  }
  if (config.launch_dbm.size() != plan.channels.size()) {
    raise(ErrorKind::Domain, "launch power vector does not match channel plan");
  }
  // booster total output against its ceiling
  double total_out_w = 0.0;
  for (size_t i = 0; i < plan.channels.size(); ++i) {
    double g = amp_channel_gain_db(line.booster, config.amps[0], grid, plan.channels[i]);
    total_out_w += dbm_to_w(config.launch_dbm[i] + g);
  }
  if (total_out_w > 0.0 &&
      w_to_dbm(total_out_w) > line.booster.max_total_output_dbm + 1e-9) {
    raise(ErrorKind::Invariant,
          "booster total output " + std::to_string(w_to_dbm(total_out_w)) +
              " dBm exceeds ceiling of " + line.booster.id);
  }
}

PropagationResult propagate_gsnr(const LineSystem& line, const SpectrumGrid& grid,
                                 const LineConfig& config, const ChannelPlan& plan) {
  validate_config(line, grid, config, plan);
  return propagate_walk(line_elements(line), grid, config, plan);
}

ChannelGsnr gsnr_at_bandwidth(const ChannelGsnr& g, double bandwidth_hz) {
  if (bandwidth_hz <= 0.0) raise(ErrorKind::Domain, "gsnr_at_bandwidth: bandwidth <= 0");
  double scale = linear_to_db(g.ref_bandwidth_hz / bandwidth_hz);
  ChannelGsnr out = g;
  out.ref_bandwidth_hz = bandwidth_hz;
  out.snr_ase_db = std::min(kGsnrCapDb, g.snr_ase_db + scale);
  out.snr_nli_db = std::min(kGsnrCapDb, g.snr_nli_db + scale);
  double inv = 1.0 / db_to_linear(out.snr_ase_db) + 1.0 / db_to_linear(out.snr_nli_db);
  out.gsnr_db = std::min(kGsnrCapDb, -linear_to_db(inv));
  return out;
}

std::vector<double> gsnr_offset_derivative(const PropagationResult& result) {
  if (result.taps.empty()) raise(ErrorKind::Domain, "empty propagation result");
  const GsnrSpectrum& end = result.taps.back().gsnr;
  std::vector<double> d;
  d.reserve(end.channels.size());
  for (const auto& c : end.channels) {
    double inv_a = 1.0 / db_to_linear(c.snr_ase_db);
    double inv_n = 1.0 / db_to_linear(c.snr_nli_db);
    d.push_back(1.0 - 3.0 * inv_n / (inv_a + inv_n));
  }
  return d;
}

double objective_offset_derivative(const PropagationResult& result,
                                   double flatness_weight) {
  const auto& channels = result.taps.back().gsnr.channels;
  if (channels.empty()) raise(ErrorKind::Domain, "no channels in propagation result");
  size_t arg_min = 0, arg_max = 0;
  for (size_t i = 1; i < channels.size(); ++i) {
    if (channels[i].gsnr_db < channels[arg_min].gsnr_db) arg_min = i;
    if (channels[i].gsnr_db > channels[arg_max].gsnr_db) arg_max = i;
  }
  std::vector<double> d = gsnr_offset_derivative(result);
  return d[arg_min] - flatness_weight * (d[arg_max] - d[arg_min]);
}

}  // namespace optwin::qot
