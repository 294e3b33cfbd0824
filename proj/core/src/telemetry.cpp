#include "optwin/telemetry.hpp"

#include <algorithm>
#include <cmath>

#include "optwin/rng.hpp"

namespace optwin::telemetry {

double receiver_snr_trx_db(double snr_trx0_db, double input_power_dbm,
                           double attenuation_db, double knee_dbm) {
  double received_dbm = input_power_dbm - attenuation_db;
  double below_knee = std::max(0.0, knee_dbm - received_dbm);
  return snr_trx0_db - below_knee;
}

namespace {

// Step events along the fiber coordinate: interior amplifiers and lumped
// losses, as signed dB applied to the channel under test.
struct FiberStep {
  double position_km;
  double delta_db;
};

struct FiberLayout {
  double launch_dbm = 0.0;  // channel power entering span 0 (booster output)
  double total_km = 0.0;
  std::vector<double> span_start_km;
  std::vector<const FiberSpan*> spans;
  std::vector<FiberStep> steps;  // sorted by position
};

FiberLayout build_layout(const LineSystem& line, const SpectrumGrid& grid,
                         const qot::LineConfig& config, const ChannelPlan& plan,
                         int channel_slot) {
  int ch_idx = plan.index_of_slot(channel_slot);
  if (ch_idx < 0) {
    raise(ErrorKind::Domain,
          "no channel anchored at slot " + std::to_string(channel_slot));
  }
  const Channel& ch = plan.channels[static_cast<size_t>(ch_idx)];
  auto amps = line.amps();
  if (config.amps.size() != amps.size()) {
    raise(ErrorKind::Domain, "config amp count mismatch for line " + line.id);
  }

  FiberLayout layout;
  layout.launch_dbm =
      config.launch_dbm[static_cast<size_t>(ch_idx)] +
      qot::amp_channel_gain_db(line.booster, config.amps[0], grid, ch);
  double pos = 0.0;
  for (size_t i = 0; i < line.spans.size(); ++i) {
    const FiberSpan& span = line.spans[i];
    layout.span_start_km.push_back(pos);
    layout.spans.push_back(&span);
    for (const auto& l : span.lumped_losses) {
      layout.steps.push_back({pos + l.position_km, -l.loss_db});
    }
    pos += span.length_km;
    if (i + 1 < line.spans.size()) {
      double g = qot::amp_channel_gain_db(line.ilas[i], config.amps[i + 1], grid, ch);
      layout.steps.push_back({pos, g});
    }
  }
  layout.total_km = pos;
  std::sort(layout.steps.begin(), layout.steps.end(),
            [](const FiberStep& a, const FiberStep& b) {
              return a.position_km < b.position_km;
            });
  return layout;
}

double layout_power_at(const FiberLayout& layout, double position_km, bool left_limit) {
  double p = layout.launch_dbm;
  // attenuation accumulated up to the position
  for (size_t i = 0; i < layout.spans.size(); ++i) {
    double start = layout.span_start_km[i];
    double end = start + layout.spans[i]->length_km;
    double inside = std::clamp(position_km, start, end) - start;
    if (inside > 0.0) p -= layout.spans[i]->attenuation_db_per_km * inside;
    if (position_km <= end) break;
  }
  for (const auto& step : layout.steps) {
    bool applied = left_limit ? step.position_km < position_km - 1e-12
                              : step.position_km <= position_km + 1e-12;
    if (applied) p += step.delta_db;
  }
  return p;
}

}  // namespace

double dlm_power_at(const LineSystem& line, const SpectrumGrid& grid,
                    const qot::LineConfig& config, const ChannelPlan& plan,
                    int channel_slot, double position_km, bool left_limit) {
  FiberLayout layout = build_layout(line, grid, config, plan, channel_slot);
  if (position_km < -1e-9 || position_km > layout.total_km + 1e-9) {
    raise(ErrorKind::Domain, "position outside the line");
  }
  return layout_power_at(layout, position_km, left_limit);
}

PowerProfile simulate_dlm_capture(const LineSystem& line, const SpectrumGrid& grid,
                                  const qot::LineConfig& config, const ChannelPlan& plan,
                                  int channel_slot, double sample_spacing_km,
                                  double noise_sigma_db, std::uint64_t seed) {
  if (sample_spacing_km <= 0.0) {
    raise(ErrorKind::Domain, "sample spacing must be > 0");
  }
  FiberLayout layout = build_layout(line, grid, config, plan, channel_slot);

  PowerProfile profile;
  profile.slot_index = channel_slot;
  profile.spacing_km = sample_spacing_km;
  profile.noise_sigma_db = noise_sigma_db;
  profile.seed = seed;
  RngStream rng(seed, "dlm.capture");
  int n = static_cast<int>(std::round(layout.total_km / sample_spacing_km));
  for (int i = 0; i <= n; ++i) {
    double pos = i * sample_spacing_km;
    // the final sample reports the end of the last span (nothing follows it)
    bool left = (i == n);
    double p = layout_power_at(layout, std::min(pos, layout.total_km), left);
    if (noise_sigma_db > 0.0) p += rng.clipped_normal(noise_sigma_db);
    profile.position_km.push_back(pos);
    profile.power_dbm.push_back(p);
  }
  return profile;
}

OsaSpectrum simulate_osa_spectrum(const LineSystem& line, const SpectrumGrid& grid,
                                  const qot::LineConfig& config, const ChannelPlan& plan,
                                  const std::string& end_node, double noise_sigma_db,
                                  std::uint64_t seed) {
  auto instr = line.endpoint_instruments.find(end_node);
  if (end_node != line.endpoints[0] && end_node != line.endpoints[1]) {
    raise(ErrorKind::Domain, "node " + end_node + " is not an endpoint of " + line.id);
  }
  if (instr == line.endpoint_instruments.end() || !instr->second.osa) {
    raise(ErrorKind::Precondition, "no OSA installed at " + end_node);
  }

  qot::PropagationResult walk = qot::propagate_walk(qot::line_elements(line), grid,
                                                    config, plan);
  // transmit-side OSA taps the booster output, receive-side the preamp output
  const qot::AmpTap& tap =
      (end_node == line.endpoints[0]) ? walk.taps.front() : walk.taps.back();

  OsaSpectrum spectrum;
  spectrum.capture_end = end_node;
  spectrum.noise_sigma_db = noise_sigma_db;
  spectrum.seed = seed;
  RngStream rng(seed, "osa.capture");
  for (int s = 0; s < grid.slot_count; ++s) {
    auto idx = static_cast<size_t>(s);
    double w = tap.slot_signal_w[idx] +
               (tap.slot_ase_psd[idx] + tap.slot_nli_psd[idx]) * qot::kRefBandwidthHz;
    double dbm = w_to_dbm(std::max(w, 1e-30));
    if (noise_sigma_db > 0.0) dbm += rng.clipped_normal(noise_sigma_db);
    spectrum.slot_power_dbm.push_back(dbm);
  }
  return spectrum;
}

VoaSweepRecord simulate_voa_sweep(const TransceiverPort& port,
                                  const ModulationFormat& format,
                                  const std::vector<double>& attenuations_db,
                                  double reference_snr_db, double input_power_dbm,
                                  double ber_log_sigma, std::uint64_t seed) {
  if (attenuations_db.empty()) {
    raise(ErrorKind::Precondition, "VOA sweep needs at least one attenuation");
  }
  for (size_t i = 1; i < attenuations_db.size(); ++i) {
    if (attenuations_db[i] <= attenuations_db[i - 1]) {
      raise(ErrorKind::Precondition, "VOA attenuations must be strictly increasing");
    }
  }

  VoaSweepRecord record;
  record.port_id = port.id;
  record.format_id = format.id;
  record.input_power_dbm = input_power_dbm;
  record.reference_snr_db = reference_snr_db;
  record.seed = seed;
  RngStream rng(seed, "voa.sweep");
  constexpr double kBerCeiling = 0.5 - 1e-9;
  for (double a : attenuations_db) {
    double snr_trx = receiver_snr_trx_db(port.snr_trx_true_db, input_power_dbm, a);
    double effective = qot::combine_with_transceiver(reference_snr_db, snr_trx);
    double ber = qot::ber_from_gsnr(format, effective);
    if (ber_log_sigma > 0.0) ber *= std::exp(rng.clipped_normal(ber_log_sigma));
    VoaPoint point;
    point.attenuation_db = a;
    point.saturated = ber >= kBerCeiling;
    point.ber = point.saturated ? kBerCeiling : ber;
    record.points.push_back(point);
  }
  return record;
}

std::vector<AmpPowerReading> read_amp_power_monitors(const LineSystem& line,
                                                     const SpectrumGrid& grid,
                                                     const qot::LineConfig& config,
                                                     const ChannelPlan& plan,
                                                     double noise_sigma_db,
                                                     std::uint64_t seed) {
  qot::PropagationResult walk = qot::propagate_walk(qot::line_elements(line), grid,
                                                    config, plan);
  std::vector<AmpPowerReading> readings;
  RngStream rng(seed, "amp.monitors");
  for (const auto& tap : walk.taps) {
    AmpPowerReading r;
    r.amp_id = tap.element_id;
    r.input_dbm = tap.total_input_dbm;
    r.output_dbm = tap.total_output_dbm;
    r.noise_sigma_db = noise_sigma_db;
    if (noise_sigma_db > 0.0) {
      r.input_dbm += rng.clipped_normal(noise_sigma_db);
      r.output_dbm += rng.clipped_normal(noise_sigma_db);
    }
    readings.push_back(r);
  }
  return readings;
}

}  // namespace optwin::telemetry
