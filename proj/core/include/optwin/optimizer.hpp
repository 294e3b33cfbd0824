#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "optwin/characterization.hpp"
#include "optwin/model.hpp"
#include "optwin/qot.hpp"

namespace optwin::optimizer {

inline constexpr double kDefaultFlatnessWeight = 0.5;
inline constexpr double kDefaultMarginDb = 1.0;
inline constexpr double kConvergenceDb = 0.01;
inline constexpr double kAmpTiltLimitDb = 3.0;
inline constexpr double kLaunchOffsetLimitDb = 6.0;
inline constexpr double kLaunchTiltLimitDb = 4.0;

struct OptimizeOptions {
  double flatness_weight = kDefaultFlatnessWeight;
  double convergence_db = kConvergenceDb;
  int max_sweeps = 60;
};

struct OptimizationResult {
  qot::LineConfig config;
  qot::GsnrSpectrum end_of_line;
  double objective_db = 0.0;
  int iterations = 0;
  double flatness_db = 0.0;  // max - min end-of-line GSNR
  double base_launch_dbm = 0.0;
  double launch_offset_db = 0.0;
  double launch_tilt_db = 0.0;

  double launch_at(const SpectrumGrid& grid, double freq_hz) const {
    return base_launch_dbm + launch_offset_db +
           launch_tilt_db * grid.normalized_freq(freq_hz);
  }
};

// Maximizes J = min-channel GSNR - w * (max - min) at the line end over
// per-amplifier gain/tilt and a two-parameter launch profile (offset + tilt),
// by deterministic coordinate descent with golden-section line searches.
// `model` is normally the calibrated twin from characterization.
OptimizationResult optimize_line(const LineSystem& model, const SpectrumGrid& grid,
                                 const ChannelPlan& plan, const qot::LineConfig& initial,
                                 const OptimizeOptions& options = {});

double gsnr_flatness_db(const qot::GsnrSpectrum& spectrum);
double min_gsnr_db(const qot::GsnrSpectrum& spectrum);
double flatness_objective_db(const qot::GsnrSpectrum& spectrum, double flatness_weight);

struct Demand {
  std::string id;
  std::string format_id;
  double net_rate_gbps = 0.0;
  double symbol_rate_gbd = 0.0;
  std::string tx_port;
  std::string rx_port;
};

struct LightpathDesign {
  std::string demand_id;
  std::string tx_port;
  std::string rx_port;
  int slot_index = 0;
  int width_slots = 1;
  std::string format_id;
  double launch_power_dbm = 0.0;
  double predicted_gsnr_db = 0.0;  // line + transceiver estimate
  double required_gsnr_db = 0.0;
  double margin_db = 0.0;          // configured design margin
};

// Assigns each demand the lowest-index usable slot block whose combined GSNR
// clears required + margin. Demands are processed by descending net rate,
// then id; identical inputs yield identical assignments.
std::vector<LightpathDesign> design_lightpaths(
    std::vector<Demand> demands, const qot::GsnrSpectrum& end_of_line,
    const std::map<std::string, characterization::TrxEstimate>& trx_by_port,
    double margin_db, double fec_limit, const std::set<int>& usable_slots,
    const std::vector<ModulationFormat>& formats, const SpectrumGrid& grid,
    const OptimizationResult& optimum);

}  // namespace optwin::optimizer
