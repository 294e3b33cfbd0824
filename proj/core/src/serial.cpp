#include "serial.hpp"

namespace optwin::serial {

json trx_to_json(const characterization::TrxEstimate& t) {
  return {{"port_id", t.port_id},
          {"snr_trx_db", t.snr_trx_db},
          {"knee_dbm", t.knee_dbm},
          {"residual_log10_ber", t.residual_log10_ber}};
}

characterization::TrxEstimate trx_from_json(const json& j) {
  characterization::TrxEstimate t;
  t.port_id = j.at("port_id").get<std::string>();
  t.snr_trx_db = j.at("snr_trx_db").get<double>();
  t.knee_dbm = j.at("knee_dbm").get<double>();
  t.residual_log10_ber = j.at("residual_log10_ber").get<double>();
  return t;
}

json link_to_json(const characterization::LinkEstimate& l) {
  json events = json::array();
  for (const auto& e : l.loss_events) {
    events.push_back({{"position_km", e.position_km}, {"magnitude_db", e.magnitude_db}});
  }
  return {{"total_length_km", l.total_length_km},
          {"span_boundaries_km", l.span_boundaries_km},
          {"span_attenuation_db_per_km", l.span_attenuation_db_per_km},
          {"amp_step_db", l.amp_step_db},
          {"loss_events", events},
          {"launch_power_dbm", l.launch_power_dbm},
          {"residual_db_rms", l.residual_db_rms}};
}

characterization::LinkEstimate link_from_json(const json& j) {
  characterization::LinkEstimate l;
  l.total_length_km = j.at("total_length_km").get<double>();
  l.span_boundaries_km = j.at("span_boundaries_km").get<std::vector<double>>();
  l.span_attenuation_db_per_km =
      j.at("span_attenuation_db_per_km").get<std::vector<double>>();
  l.amp_step_db = j.at("amp_step_db").get<std::vector<double>>();
  for (const auto& e : j.at("loss_events")) {
    l.loss_events.push_back(
        {e.at("position_km").get<double>(), e.at("magnitude_db").get<double>()});
  }
  l.launch_power_dbm = j.at("launch_power_dbm").get<double>();
  l.residual_db_rms = j.at("residual_db_rms").get<double>();
  return l;
}

json ols_to_json(const characterization::OlsEstimate& o) {
  return {{"noise_figure_db", o.noise_figure_db},
          {"ripple_db", o.ripple_db},
          {"residual_db_rms", o.residual_db_rms},
          {"probe_count", o.probe_count}};
}

characterization::OlsEstimate ols_from_json(const json& j) {
  characterization::OlsEstimate o;
  o.noise_figure_db = j.at("noise_figure_db").get<std::vector<double>>();
  o.ripple_db = j.at("ripple_db").get<std::vector<std::vector<double>>>();
  o.residual_db_rms = j.at("residual_db_rms").get<double>();
  o.probe_count = j.at("probe_count").get<int>();
  return o;
}

json line_config_to_json(const qot::LineConfig& c) {
  json amps = json::array();
  for (const auto& a : c.amps) {
    amps.push_back({{"gain_db", a.gain_db}, {"tilt_db", a.tilt_db}});
  }
  return {{"amps", amps}, {"launch_dbm", c.launch_dbm}};
}

qot::LineConfig line_config_from_json(const json& j) {
  qot::LineConfig c;
  for (const auto& a : j.at("amps")) {
    c.amps.push_back({a.at("gain_db").get<double>(), a.at("tilt_db").get<double>()});
  }
  c.launch_dbm = j.at("launch_dbm").get<std::vector<double>>();
  return c;
}

json gsnr_spectrum_to_json(const qot::GsnrSpectrum& s) {
  json channels = json::array();
  for (const auto& c : s.channels) {
    channels.push_back({{"slot_index", c.slot_index},
                        {"gsnr_db", c.gsnr_db},
                        {"snr_ase_db", c.snr_ase_db},
                        {"snr_nli_db", c.snr_nli_db},
                        {"ref_bandwidth_hz", c.ref_bandwidth_hz}});
  }
  return {{"reference_element", s.reference_element},
          {"element_id", s.element_id},
          {"channels", channels}};
}

qot::GsnrSpectrum gsnr_spectrum_from_json(const json& j) {
  qot::GsnrSpectrum s;
  s.reference_element = j.at("reference_element").get<int>();
  s.element_id = j.at("element_id").get<std::string>();
  for (const auto& c : j.at("channels")) {
    qot::ChannelGsnr g;
    g.slot_index = c.at("slot_index").get<int>();
    g.gsnr_db = c.at("gsnr_db").get<double>();
    g.snr_ase_db = c.at("snr_ase_db").get<double>();
    g.snr_nli_db = c.at("snr_nli_db").get<double>();
    g.ref_bandwidth_hz = c.at("ref_bandwidth_hz").get<double>();
    s.channels.push_back(g);
  }
  return s;
}

json optimization_to_json(const optimizer::OptimizationResult& r) {
  return {{"config", line_config_to_json(r.config)},
          {"end_of_line", gsnr_spectrum_to_json(r.end_of_line)},
          {"objective_db", r.objective_db},
          {"iterations", r.iterations},
          {"flatness_db", r.flatness_db},
          {"base_launch_dbm", r.base_launch_dbm},
          {"launch_offset_db", r.launch_offset_db},
          {"launch_tilt_db", r.launch_tilt_db}};
}

optimizer::OptimizationResult optimization_from_json(const json& j) {
  optimizer::OptimizationResult r;
  r.config = line_config_from_json(j.at("config"));
  r.end_of_line = gsnr_spectrum_from_json(j.at("end_of_line"));
  r.objective_db = j.at("objective_db").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.flatness_db = j.at("flatness_db").get<double>();
  r.base_launch_dbm = j.at("base_launch_dbm").get<double>();
  r.launch_offset_db = j.at("launch_offset_db").get<double>();
  r.launch_tilt_db = j.at("launch_tilt_db").get<double>();
  return r;
}

json design_to_json(const optimizer::LightpathDesign& d) {
  return {{"demand_id", d.demand_id},
          {"tx_port", d.tx_port},
          {"rx_port", d.rx_port},
          {"slot_index", d.slot_index},
          {"width_slots", d.width_slots},
          {"format_id", d.format_id},
          {"launch_power_dbm", d.launch_power_dbm},
          {"predicted_gsnr_db", d.predicted_gsnr_db},
          {"required_gsnr_db", d.required_gsnr_db},
          {"margin_db", d.margin_db}};
}

optimizer::LightpathDesign design_from_json(const json& j) {
  optimizer::LightpathDesign d;
  d.demand_id = j.at("demand_id").get<std::string>();
  d.tx_port = j.at("tx_port").get<std::string>();
  d.rx_port = j.at("rx_port").get<std::string>();
  d.slot_index = j.at("slot_index").get<int>();
  d.width_slots = j.at("width_slots").get<int>();
  d.format_id = j.at("format_id").get<std::string>();
  d.launch_power_dbm = j.at("launch_power_dbm").get<double>();
  d.predicted_gsnr_db = j.at("predicted_gsnr_db").get<double>();
  d.required_gsnr_db = j.at("required_gsnr_db").get<double>();
  d.margin_db = j.at("margin_db").get<double>();
  return d;
}

json outcome_to_json(const orchestrator::LightpathOutcome& o) {
  return {{"design", design_to_json(o.design)},
          {"design_gsnr_db", o.design_gsnr_db},
          {"measured_gsnr_db", o.measured_gsnr_db},
          {"delta_db", o.delta_db}};
}

orchestrator::LightpathOutcome outcome_from_json(const json& j) {
  orchestrator::LightpathOutcome o;
  o.design = design_from_json(j.at("design"));
  o.design_gsnr_db = j.at("design_gsnr_db").get<double>();
  o.measured_gsnr_db = j.at("measured_gsnr_db").get<double>();
  o.delta_db = j.at("delta_db").get<double>();
  return o;
}

json migration_to_json(const orchestrator::MigrationSummary& m) {
  return {{"dataset_gb", m.dataset_gb},
          {"bytes", m.bytes},
          {"capacity_gbps", m.capacity_gbps},
          {"utilization", m.utilization},
          {"setup_overhead_min", m.setup_overhead_min},
          {"transfer_s", m.transfer_s},
          {"duration_min", m.duration_min}};
}

orchestrator::MigrationSummary migration_from_json(const json& j) {
  orchestrator::MigrationSummary m;
  m.dataset_gb = j.at("dataset_gb").get<double>();
  m.bytes = j.at("bytes").get<std::uint64_t>();
  m.capacity_gbps = j.at("capacity_gbps").get<double>();
  m.utilization = j.at("utilization").get<double>();
  m.setup_overhead_min = j.at("setup_overhead_min").get<double>();
  m.transfer_s = j.at("transfer_s").get<double>();
  m.duration_min = j.at("duration_min").get<double>();
  return m;
}

json step_to_json(const orchestrator::StepRecord& s) {
  return {{"id", s.id},
          {"started_min", s.started_min},
          {"ended_min", s.ended_min},
          {"duration_min", s.duration_min}};
}

orchestrator::StepRecord step_from_json(const json& j) {
  orchestrator::StepRecord s;
  s.id = j.at("id").get<std::string>();
  s.started_min = j.at("started_min").get<double>();
  s.ended_min = j.at("ended_min").get<double>();
  s.duration_min = j.at("duration_min").get<double>();
  return s;
}

json figures_to_json(const orchestrator::FigureData& f) {
  json j;
  json launch = json::array();
  for (const auto& r : f.launch_power) {
    launch.push_back({{"slot_index", r.slot_index},
                      {"frequency_thz", r.frequency_thz},
                      {"launch_power_dbm", r.launch_power_dbm}});
  }
  j["launch_power"] = launch;
  json gsnr = json::array();
  for (const auto& r : f.accumulated_gsnr) {
    gsnr.push_back({{"slot_index", r.slot_index},
                    {"frequency_thz", r.frequency_thz},
                    {"point_index", r.point_index},
                    {"element_id", r.element_id},
                    {"gsnr_db", r.gsnr_db},
                    {"snr_ase_db", r.snr_ase_db},
                    {"snr_nli_db", r.snr_nli_db}});
  }
  j["accumulated_gsnr"] = gsnr;
  j["dlm_profile"] = {{"position_km", f.dlm_position_km},
                      {"power_dbm_before", f.dlm_before_dbm},
                      {"power_dbm_after", f.dlm_after_dbm}};
  json spectrum = json::array();
  for (const auto& r : f.received_spectrum) {
    spectrum.push_back({{"slot_index", r.slot_index},
                        {"frequency_thz", r.frequency_thz},
                        {"power_dbm", r.power_dbm},
                        {"role", r.role}});
  }
  j["received_spectrum"] = spectrum;
  return j;
}

orchestrator::FigureData figures_from_json(const json& j) {
  orchestrator::FigureData f;
  for (const auto& r : j.at("launch_power")) {
    f.launch_power.push_back({r.at("slot_index").get<int>(),
                              r.at("frequency_thz").get<double>(),
                              r.at("launch_power_dbm").get<double>()});
  }
  for (const auto& r : j.at("accumulated_gsnr")) {
    f.accumulated_gsnr.push_back(
        {r.at("slot_index").get<int>(), r.at("frequency_thz").get<double>(),
         r.at("point_index").get<int>(), r.at("element_id").get<std::string>(),
         r.at("gsnr_db").get<double>(), r.at("snr_ase_db").get<double>(),
         r.at("snr_nli_db").get<double>()});
  }
  const json& dlm = j.at("dlm_profile");
  f.dlm_position_km = dlm.at("position_km").get<std::vector<double>>();
  f.dlm_before_dbm = dlm.at("power_dbm_before").get<std::vector<double>>();
  f.dlm_after_dbm = dlm.at("power_dbm_after").get<std::vector<double>>();
  for (const auto& r : j.at("received_spectrum")) {
    f.received_spectrum.push_back(
        {r.at("slot_index").get<int>(), r.at("frequency_thz").get<double>(),
         r.at("power_dbm").get<double>(), r.at("role").get<std::string>()});
  }
  return f;
}

json profile_to_json(const telemetry::PowerProfile& p) {
  return {{"slot_index", p.slot_index},
          {"spacing_km", p.spacing_km},
          {"noise_sigma_db", p.noise_sigma_db},
          {"seed", p.seed},
          {"position_km", p.position_km},
          {"power_dbm", p.power_dbm}};
}

telemetry::PowerProfile profile_from_json(const json& j) {
  telemetry::PowerProfile p;
  p.slot_index = j.at("slot_index").get<int>();
  p.spacing_km = j.at("spacing_km").get<double>();
  p.noise_sigma_db = j.at("noise_sigma_db").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.position_km = j.at("position_km").get<std::vector<double>>();
  p.power_dbm = j.at("power_dbm").get<std::vector<double>>();
  return p;
}

}  // namespace optwin::serial
