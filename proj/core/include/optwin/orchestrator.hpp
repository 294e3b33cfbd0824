#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optwin/characterization.hpp"
#include "optwin/control_plane.hpp"
#include "optwin/model.hpp"
#include "optwin/optimizer.hpp"
#include "optwin/telemetry.hpp"

namespace optwin::orchestrator {

inline constexpr const char* kStepNames[] = {
    "trx_characterization", "dlm_measure", "dlm_analyze", "ols_measure",
    "ols_analyze",          "dlm_validate", "trx_configure", "migrate"};

enum class Outcome { Succeeded, DeadlineExceeded, Infeasible };

const char* outcome_name(Outcome o);

struct RecoveryOptions {
  double margin_db = 1.0;
  double fec_limit = qot::kDefaultFecLimit;
  int probe_count = 8;
  double initial_fiber_launch_dbm = 0.0;  // per channel entering span 0
  double probe_fiber_launch_dbm = -6.0;   // keeps NLI out of the ASE floor fit
  double dlm_spacing_km = telemetry::kDefaultDlmSpacingKm;
  double dlm_sigma_db = telemetry::kDefaultDlmSigmaDb;
  double detection_threshold_db = characterization::kDefaultDetectionThresholdDb;
  double osa_sigma_db = telemetry::kDefaultOsaSigmaDb;
  double amp_monitor_sigma_db = telemetry::kDefaultAmpMonitorSigmaDb;
  double voa_ber_log_sigma = telemetry::kDefaultBerLogSigma;
  double validate_sigma_db = 0.2;
  double migration_utilization = 0.8;
  double migration_setup_min = 9.5;
  double lease_duration_hours = 24.0;
  int dlm_probe_slot = 24;
  double probe_symbol_rate_gbd = 63.1;
};

struct StepRecord {
  std::string id;
  double started_min = 0.0;
  double ended_min = 0.0;
  double duration_min = 0.0;
};

struct LightpathOutcome {
  optimizer::LightpathDesign design;
  double design_gsnr_db = 0.0;    // design-stage QoT: prediction minus margin
  double measured_gsnr_db = 0.0;  // ground-truth propagate + measurement noise
  double delta_db = 0.0;          // measured - design
};

struct MigrationSummary {
  double dataset_gb = 0.0;
  std::uint64_t bytes = 0;
  double capacity_gbps = 0.0;
  double utilization = 0.0;
  double setup_overhead_min = 0.0;
  double transfer_s = 0.0;
  double duration_min = 0.0;
};

struct OptimizationSummary {
  double objective_db = 0.0;
  int iterations = 0;
  double flatness_before_db = 0.0;  // twin model, initial config
  double flatness_after_db = 0.0;
  double min_gsnr_db = 0.0;
  double launch_offset_db = 0.0;
  double launch_tilt_db = 0.0;
};

struct FigureData {
  struct LaunchRow {
    int slot_index;
    double frequency_thz;
    double launch_power_dbm;
  };
  std::vector<LaunchRow> launch_power;

  struct GsnrRow {
    int slot_index;
    double frequency_thz;
    int point_index;
    std::string element_id;
    double gsnr_db, snr_ase_db, snr_nli_db;
  };
  std::vector<GsnrRow> accumulated_gsnr;

  std::vector<double> dlm_position_km, dlm_before_dbm, dlm_after_dbm;

  struct SpectrumRow {
    int slot_index;
    double frequency_thz;
    double power_dbm;
    std::string role;
  };
  std::vector<SpectrumRow> received_spectrum;
};

struct RecoveryReport {
  std::uint64_t seed = 0;
  std::string scenario_line_id;
  Outcome outcome = Outcome::Succeeded;
  std::string failing_step;  // step in progress when the run stopped
  std::string failure_detail;
  std::vector<StepRecord> steps;
  double total_duration_min = 0.0;
  double fuel_deadline_hours = 0.0;
  std::optional<characterization::LinkEstimate> link_estimate;
  std::optional<characterization::OlsEstimate> ols_estimate;
  std::vector<characterization::TrxEstimate> trx_estimates;
  std::optional<OptimizationSummary> optimization;
  std::vector<LightpathOutcome> lightpaths;
  std::optional<MigrationSummary> migration;
  std::string lease_id;
  FigureData figures;
};

// Inclusive exhaustion: the generator is considered dry at exactly the fuel
// budget.
bool fuel_exhausted_at(double elapsed_min, double fuel_hours);

enum class FuelStatus { Ok, Exhausted };
FuelStatus fuel_check(double elapsed_min, const DataCenter& dc);

MigrationSummary migrate_dataset(double size_gb, double capacity_gbps,
                                 double utilization, double setup_overhead_min);

// Ground-truth validation of provisioned designs: predicted comes from the
// design (minus the design margin), measured from the true line plus seeded
// measurement noise.
std::vector<LightpathOutcome> validate_designs(
    const std::vector<optimizer::LightpathDesign>& designs, const Scenario& scenario,
    const LineSystem& truth_line, const SpectrumGrid& grid,
    const qot::LineConfig& config, const ChannelPlan& plan, double noise_sigma_db,
    std::uint64_t seed);

RecoveryReport run_recovery(const Scenario& scenario, std::uint64_t seed,
                            const RecoveryOptions& options = {});

// Step-wise execution for the CLI: the same workflow cut at artifact
// boundaries, with state persisted by the caller between stages.
class Workflow {
 public:
  Workflow(const Scenario& scenario, std::uint64_t seed, const RecoveryOptions& options);
  ~Workflow();

  // Stages in order; each returns false when the run has stopped (deadline or
  // infeasibility) and further stages must not run.
  bool stage_characterize();  // setup + steps 1-3
  bool stage_calibrate();     // step 4 (measurement probes + calibration fit)
  bool stage_optimize();      // steps 5-6 (optimization + DLM validation)
  bool stage_provision();     // step 7 (design, provision, validate)
  bool stage_migrate();       // step 8

  RecoveryReport report() const;

  // state round-trip for the step-wise CLI
  std::string save_state() const;
  static std::unique_ptr<Workflow> load_state(const Scenario& scenario,
                                              const RecoveryOptions& options,
                                              const std::string& state_json);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace optwin::orchestrator
