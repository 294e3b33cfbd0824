#pragma once

#include <string>
#include <vector>

#include "optwin/model.hpp"
#include "optwin/telemetry.hpp"

// Estimators recover line parameters from telemetry records alone. By
// construction none of these functions accept a LineSystem or Edfa, so hidden
// ground truth cannot leak into an estimate.
namespace optwin::characterization {

inline constexpr double kDefaultDetectionThresholdDb = 0.6;  // 3x default DLM sigma
inline constexpr double kEventMergeKm = 0.5;
inline constexpr double kDetectorWindowKm = 1.5;

struct LossEvent {
  double position_km = 0.0;
  double magnitude_db = 0.0;
};

struct LinkEstimate {
  double total_length_km = 0.0;
  std::vector<double> span_boundaries_km;          // interior amplifier positions
  std::vector<double> span_attenuation_db_per_km;  // one per span
  std::vector<double> amp_step_db;                 // net gain step per boundary
  std::vector<LossEvent> loss_events;
  double launch_power_dbm = 0.0;
  double residual_db_rms = 0.0;
};

LinkEstimate analyze_dlm_profile(const telemetry::PowerProfile& profile,
                                 double detection_threshold_db = kDefaultDetectionThresholdDb);

struct OlsEstimate {
  std::vector<double> noise_figure_db;         // per amp: booster, ILAs, preamp
  std::vector<std::vector<double>> ripple_db;  // per amp, per slot, zero mean
  double residual_db_rms = 0.0;
  int probe_count = 0;
};

struct ProbeRecord {
  qot::LineConfig config;
  ChannelPlan plan;
  telemetry::OsaSpectrum near_end;  // transmit-side OSA, taps the booster output
  telemetry::OsaSpectrum far_end;
  std::vector<telemetry::AmpPowerReading> amp_readings;
};

OlsEstimate calibrate_ols(const std::vector<ProbeRecord>& probes,
                          const PublicLineSpecs& specs);

struct TrxEstimate {
  std::string port_id;
  double snr_trx_db = 0.0;
  double knee_dbm = 0.0;
  double residual_log10_ber = 0.0;
};

TrxEstimate fit_transceiver_noise(const telemetry::VoaSweepRecord& sweep,
                                  const ModulationFormat& format);

struct ProfileDelta {
  std::vector<double> position_km;
  std::vector<double> delta_db;  // after - before
  double max_abs_db = 0.0;
  double mean_db = 0.0;
};

ProfileDelta compare_profiles(const telemetry::PowerProfile& before,
                              const telemetry::PowerProfile& after);

// Builds the calibrated digital twin: estimated spans and amplifiers plus the
// published device limits and nominal fiber constants.
LineSystem assemble_line_model(const LinkEstimate& link, const OlsEstimate& ols,
                               const PublicLineSpecs& specs);

}  // namespace optwin::characterization
