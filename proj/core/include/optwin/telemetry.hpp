#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optwin/model.hpp"
#include "optwin/qot.hpp"

namespace optwin::telemetry {

inline constexpr double kDefaultDlmSpacingKm = 0.1;
inline constexpr double kDefaultDlmSigmaDb = 0.2;
inline constexpr double kDefaultOsaSigmaDb = 0.1;
inline constexpr double kDefaultAmpMonitorSigmaDb = 0.1;
inline constexpr double kDefaultBerLogSigma = 0.1;  // ln-domain counting noise
inline constexpr double kReceiverKneeDbm = -15.0;

// Every record below is what an estimator is allowed to see. None of them
// carry span parameters, amplifier noise figures, ripple shapes or true
// transceiver SNRs; only their observable consequences.

struct PowerProfile {
  int slot_index = 0;  // channel under test
  double spacing_km = 0.0;
  double noise_sigma_db = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> position_km;  // strictly increasing, 0 .. line length
  std::vector<double> power_dbm;
};

struct OsaSpectrum {
  std::string capture_end;
  double noise_sigma_db = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> slot_power_dbm;  // one per grid slot, in kRefBandwidthHz
};

struct VoaPoint {
  double attenuation_db = 0.0;
  double ber = 0.0;
  bool saturated = false;
};

struct VoaSweepRecord {
  std::string port_id;
  std::string format_id;
  double input_power_dbm = 0.0;   // received power at zero attenuation
  double reference_snr_db = 0.0;  // SNR entering the port (high when back-to-back)
  std::uint64_t seed = 0;
  std::vector<VoaPoint> points;   // attenuations strictly increasing
};

struct AmpPowerReading {
  std::string amp_id;
  double input_dbm = 0.0;
  double output_dbm = 0.0;
  double noise_sigma_db = 0.0;
};

// Receiver-noise model shared between the simulator and the estimator's fit:
// the transceiver SNR holds at its back-to-back value above the knee input
// power and falls dB-for-dB below it.
double receiver_snr_trx_db(double snr_trx0_db, double input_power_dbm,
                           double attenuation_db, double knee_dbm = kReceiverKneeDbm);

// Noiseless piecewise profile value; `left_limit` selects the value just
// before an amplifier/loss step placed exactly at `position_km`.
double dlm_power_at(const LineSystem& line, const SpectrumGrid& grid,
                    const qot::LineConfig& config, const ChannelPlan& plan,
                    int channel_slot, double position_km, bool left_limit = false);

PowerProfile simulate_dlm_capture(const LineSystem& line, const SpectrumGrid& grid,
                                  const qot::LineConfig& config, const ChannelPlan& plan,
                                  int channel_slot, double sample_spacing_km,
                                  double noise_sigma_db, std::uint64_t seed);

OsaSpectrum simulate_osa_spectrum(const LineSystem& line, const SpectrumGrid& grid,
                                  const qot::LineConfig& config, const ChannelPlan& plan,
                                  const std::string& end_node, double noise_sigma_db,
                                  std::uint64_t seed);

VoaSweepRecord simulate_voa_sweep(const TransceiverPort& port,
                                  const ModulationFormat& format,
                                  const std::vector<double>& attenuations_db,
                                  double reference_snr_db, double input_power_dbm,
                                  double ber_log_sigma, std::uint64_t seed);

std::vector<AmpPowerReading> read_amp_power_monitors(const LineSystem& line,
                                                     const SpectrumGrid& grid,
                                                     const qot::LineConfig& config,
                                                     const ChannelPlan& plan,
                                                     double noise_sigma_db,
                                                     std::uint64_t seed);

}  // namespace optwin::telemetry
