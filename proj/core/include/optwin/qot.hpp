#pragma once

#include <string>
#include <variant>
#include <vector>

#include "optwin/model.hpp"

namespace optwin::qot {

inline constexpr double kRefBandwidthHz = 12.5e9;  // 0.1 nm OSNR reference
inline constexpr double kGsnrCapDb = 60.0;         // finite stand-in for "noise free"
inline constexpr double kLossOfSignalDbm = -50.0;  // per channel at an amp input
inline constexpr double kMinBeta2Ps2Km = 0.1;      // GN closed form needs dispersion
inline constexpr double kDefaultFecLimit = 2.0e-2;

// L_eff = (1 - e^(-aL)) / a with a the power attenuation coefficient; tends
// to L as the fiber becomes lossless.
double effective_length_km(double attenuation_db_per_km, double length_km);

// P_ASE = NF * h*nu * (G - 1) * B_ref, single amplifier, both polarizations.
double ase_power_w(double gain_db, double noise_figure_db, double carrier_hz,
                   double ref_bandwidth_hz);

// Incoherent single-span GN model under full spectral load: NLI PSD generated
// by one span given the flat WDM PSD at its input.
double nli_psd_per_span(const FiberSpan& span, double wdm_psd_w_per_hz,
                        double total_bandwidth_hz);

// Inverse-SNR addition; +inf on either side passes the other through.
double combine_with_transceiver(double gsnr_db, double snr_trx_db);

double ber_from_gsnr(const ModulationFormat& format, double gsnr_db);

// Numerical inverse of ber_from_gsnr, bisected to 0.01 dB.
double required_gsnr_db(const ModulationFormat& format, double fec_limit);

// ---------------------------------------------------------------------------
// Line propagation
// ---------------------------------------------------------------------------

struct AmpSetting {
  double gain_db = 0.0;
  double tilt_db = 0.0;
};

struct LineConfig {
  std::vector<AmpSetting> amps;     // booster, ILAs..., preamp
  std::vector<double> launch_dbm;   // aligned with the channel plan
};

struct ChannelGsnr {
  int slot_index = 0;
  double gsnr_db = 0.0;
  double snr_ase_db = 0.0;
  double snr_nli_db = 0.0;
  double ref_bandwidth_hz = 0.0;  // bandwidth the SNRs are referenced to
};

struct GsnrSpectrum {
  int reference_element = 0;  // amplifier index along the line
  std::string element_id;
  std::vector<ChannelGsnr> channels;
};

// State recorded at each amplifier output.
struct AmpTap {
  std::string element_id;
  double total_input_dbm = 0.0;
  double total_output_dbm = 0.0;
  std::vector<double> slot_signal_w;   // per-slot share of channel power
  std::vector<double> slot_ase_psd;    // W/Hz at each slot carrier
  std::vector<double> slot_nli_psd;    // W/Hz at each slot carrier
  GsnrSpectrum gsnr;
};

struct PropagationResult {
  std::vector<AmpTap> taps;  // booster, ILAs..., preamp (= line end)
};

// Element sequence for the walk; LineSystem produces booster, span, ILA, ...,
// span, preamp, but degenerate sequences are accepted for model-level tests.
struct WalkAmp {
  const Edfa* amp;
};
struct WalkSpan {
  const FiberSpan* span;
};
using WalkElement = std::variant<WalkAmp, WalkSpan>;

std::vector<WalkElement> line_elements(const LineSystem& line);

PropagationResult propagate_walk(const std::vector<WalkElement>& elements,
                                 const SpectrumGrid& grid, const LineConfig& config,
                                 const ChannelPlan& plan);

PropagationResult propagate_gsnr(const LineSystem& line, const SpectrumGrid& grid,
                                 const LineConfig& config, const ChannelPlan& plan);

// Checks gain ranges and the booster total-output ceiling; throws on breach.
void validate_config(const LineSystem& line, const SpectrumGrid& grid,
                     const LineConfig& config, const ChannelPlan& plan);

// Re-references an end-of-line SNR record to a different bandwidth (both ASE
// and NLI are flat PSDs in this model, so SNR scales inversely with it).
ChannelGsnr gsnr_at_bandwidth(const ChannelGsnr& g, double bandwidth_hz);

// Analytic d(GSNR_dB)/d(offset_dB) per channel for a uniform launch-power
// offset applied at the input: 1 - 3*N/(A+N) with A, N the end-of-line ASE
// and NLI powers in the channel bandwidth.
std::vector<double> gsnr_offset_derivative(const PropagationResult& result);

// Derivative of the flatness objective min - w*(max - min) under the same
// uniform offset, used to cross-check the optimizer's search direction.
double objective_offset_derivative(const PropagationResult& result,
                                   double flatness_weight);

// Per-slot gain: configured gain + tilt at the slot carrier + slot ripple.
double amp_slot_gain_db(const Edfa& amp, const AmpSetting& setting,
                        const SpectrumGrid& grid, int slot);

// Per-channel gain: tilt evaluated at the channel center, ripple averaged
// over the occupied slots.
double amp_channel_gain_db(const Edfa& amp, const AmpSetting& setting,
                           const SpectrumGrid& grid, const Channel& channel);

}  // namespace optwin::qot
