#pragma once

// Internal JSON (de)serializers for workflow artifacts. Not installed; the
// public surface exposes strings only.

#include "json.hpp"
#include "optwin/characterization.hpp"
#include "optwin/optimizer.hpp"
#include "optwin/orchestrator.hpp"
#include "optwin/telemetry.hpp"

namespace optwin::serial {

using nlohmann::json;

json trx_to_json(const characterization::TrxEstimate& t);
characterization::TrxEstimate trx_from_json(const json& j);

json link_to_json(const characterization::LinkEstimate& l);
characterization::LinkEstimate link_from_json(const json& j);

json ols_to_json(const characterization::OlsEstimate& o);
characterization::OlsEstimate ols_from_json(const json& j);

json line_config_to_json(const qot::LineConfig& c);
qot::LineConfig line_config_from_json(const json& j);

json gsnr_spectrum_to_json(const qot::GsnrSpectrum& s);
qot::GsnrSpectrum gsnr_spectrum_from_json(const json& j);

json optimization_to_json(const optimizer::OptimizationResult& r);
optimizer::OptimizationResult optimization_from_json(const json& j);

json design_to_json(const optimizer::LightpathDesign& d);
optimizer::LightpathDesign design_from_json(const json& j);

json outcome_to_json(const orchestrator::LightpathOutcome& o);
orchestrator::LightpathOutcome outcome_from_json(const json& j);

json migration_to_json(const orchestrator::MigrationSummary& m);
orchestrator::MigrationSummary migration_from_json(const json& j);

json step_to_json(const orchestrator::StepRecord& s);
orchestrator::StepRecord step_from_json(const json& j);

json figures_to_json(const orchestrator::FigureData& f);
orchestrator::FigureData figures_from_json(const json& j);

json profile_to_json(const telemetry::PowerProfile& p);
telemetry::PowerProfile profile_from_json(const json& j);

}  // namespace optwin::serial
