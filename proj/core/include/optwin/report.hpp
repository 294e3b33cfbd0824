#pragma once

#include <string>

#include "optwin/orchestrator.hpp"

namespace optwin::report {

// Canonical report.json text: sorted keys, 6-significant-digit numbers.
std::string report_to_json(const orchestrator::RecoveryReport& r);

// Stage artifacts the step-wise CLI persists between commands.
std::string trx_estimates_to_json(const orchestrator::RecoveryReport& r);
std::string link_estimate_to_json(const orchestrator::RecoveryReport& r);
std::string ols_estimate_to_json(const orchestrator::RecoveryReport& r);
std::string optimization_to_json_text(const orchestrator::RecoveryReport& r,
                                      const qot::LineConfig& config);
std::string lightpaths_to_json(const orchestrator::RecoveryReport& r);

// Writes launch_power.csv, accumulated_gsnr.csv, dlm_profile_before_after.csv
// and received_spectrum.csv (plus SVG line plots when `svg`). Sections missing
// from the report are skipped with a warning; returns the warning count.
int emit_figures(const orchestrator::RecoveryReport& r, const std::string& out_dir,
                 bool svg);

// Same, for a previously written report.json.
int emit_figures_from_text(const std::string& report_json_text,
                           const std::string& out_dir, bool svg);

}  // namespace optwin::report
