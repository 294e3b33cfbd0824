#include "optwin/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "optwin/json_io.hpp"
#include "optwin/rng.hpp"

namespace optwin {

using nlohmann::json;

namespace {

// --- schema helpers ---------------------------------------------------------

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) raise(ErrorKind::Schema, where + " must be an object");
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      raise(ErrorKind::Schema, where + ": unknown key \"" + it.key() + "\"");
    }
  }
}

const json& req(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) raise(ErrorKind::Schema, where + ": missing key \"" + key + "\"");
  return *it;
}

double req_number(const json& j, const std::string& key, const std::string& where) {
  const json& v = req(j, key, where);
  if (!v.is_number()) raise(ErrorKind::Schema, where + "." + key + " must be a number");
  return v.get<double>();
}

int req_int(const json& j, const std::string& key, const std::string& where) {
  const json& v = req(j, key, where);
  if (!v.is_number_integer()) {
    raise(ErrorKind::Schema, where + "." + key + " must be an integer");
  }
  return v.get<int>();
}

std::string req_string(const json& j, const std::string& key, const std::string& where) {
  const json& v = req(j, key, where);
  if (!v.is_string()) raise(ErrorKind::Schema, where + "." + key + " must be a string");
  return v.get<std::string>();
}

bool opt_bool(const json& j, const std::string& key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) raise(ErrorKind::Schema, key + " must be a boolean");
  return it->get<bool>();
}

const json& req_array(const json& j, const std::string& key, const std::string& where) {
  const json& v = req(j, key, where);
  if (!v.is_array()) raise(ErrorKind::Schema, where + "." + key + " must be an array");
  return v;
}

// --- section parsers --------------------------------------------------------

Edfa parse_edfa(const json& j, const std::string& where, int slot_count) {
  expect_object(j, where);
  reject_unknown_keys(j,
                      {"id", "gain_db", "tilt_db", "noise_figure_db",
                       "gain_ripple_db", "gain_range_db", "max_total_output_dbm"},
                      where);
  Edfa e;
  e.id = req_string(j, "id", where);
  e.gain_db = req_number(j, "gain_db", where);
  e.tilt_db = req_number(j, "tilt_db", where);
  e.noise_figure_db = req_number(j, "noise_figure_db", where);
  const json& range = req_array(j, "gain_range_db", where);
  if (range.size() != 2 || !range[0].is_number() || !range[1].is_number()) {
    raise(ErrorKind::Schema, where + ".gain_range_db must be [min, max]");
  }
  e.gain_range_db = {range[0].get<double>(), range[1].get<double>()};
  e.max_total_output_dbm = req_number(j, "max_total_output_dbm", where);
  if (auto it = j.find("gain_ripple_db"); it != j.end()) {
    if (!it->is_array()) raise(ErrorKind::Schema, where + ".gain_ripple_db must be an array");
    for (const auto& v : *it) e.gain_ripple_db.push_back(v.get<double>());
  }

  if (e.noise_figure_db < 3.0) {
    raise(ErrorKind::Invariant, where + ": noise_figure_db " +
                                    std::to_string(e.noise_figure_db) + " below 3 dB");
  }
  if (e.gain_range_db[0] > e.gain_range_db[1]) {
    raise(ErrorKind::Invariant, where + ": gain_range_db inverted");
  }
  if (e.gain_db < e.gain_range_db[0] || e.gain_db > e.gain_range_db[1]) {
    raise(ErrorKind::Invariant, where + ": configured gain outside gain_range");
  }
  if (!e.gain_ripple_db.empty()) {
    if (static_cast<int>(e.gain_ripple_db.size()) != slot_count) {
      raise(ErrorKind::Invariant, where + ": gain_ripple_db length must equal grid slot count");
    }
    double mean = 0.0;
    for (double r : e.gain_ripple_db) mean += r;
    mean /= static_cast<double>(e.gain_ripple_db.size());
    // tolerance covers 6-significant-digit serialization round-trips
    if (std::abs(mean) > 5e-6) {
      raise(ErrorKind::Invariant, where + ": gain ripple must be zero-mean");
    }
  }
  return e;
}

FiberSpan parse_span(const json& j, const std::string& where) {
  expect_object(j, where);
  reject_unknown_keys(j,
                      {"id", "length_km", "attenuation_db_per_km",
                       "dispersion_beta2_ps2_km", "nonlinear_gamma_per_w_km",
                       "lumped_losses"},
                      where);
  FiberSpan s;
  s.id = req_string(j, "id", where);
  s.length_km = req_number(j, "length_km", where);
  s.attenuation_db_per_km = req_number(j, "attenuation_db_per_km", where);
  s.dispersion_beta2_ps2_km = req_number(j, "dispersion_beta2_ps2_km", where);
  s.nonlinear_gamma_per_w_km = req_number(j, "nonlinear_gamma_per_w_km", where);
  if (auto it = j.find("lumped_losses"); it != j.end()) {
    if (!it->is_array()) raise(ErrorKind::Schema, where + ".lumped_losses must be an array");
    for (const auto& lj : *it) {
      expect_object(lj, where + ".lumped_losses[]");
      reject_unknown_keys(lj, {"position_km", "loss_db"}, where + ".lumped_losses[]");
      LumpedLoss l;
      l.position_km = req_number(lj, "position_km", where);
      l.loss_db = req_number(lj, "loss_db", where);
      s.lumped_losses.push_back(l);
    }
  }

  if (s.length_km <= 0.0) raise(ErrorKind::Invariant, where + ": length_km must be > 0");
  if (s.attenuation_db_per_km <= 0.0) {
    raise(ErrorKind::Invariant, where + ": attenuation_db_per_km must be > 0");
  }
  for (const auto& l : s.lumped_losses) {
    if (l.position_km < 0.0 || l.position_km > s.length_km) {
      raise(ErrorKind::Invariant, where + ": lumped loss position outside span");
    }
    if (l.loss_db < 0.0) raise(ErrorKind::Invariant, where + ": lumped loss must be >= 0 dB");
  }
  return s;
}

}  // namespace

Scenario validate_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::Schema, std::string("scenario is not valid JSON: ") + e.what());
  }
  expect_object(doc, "scenario");
  reject_unknown_keys(doc,
                      {"operators", "nodes", "line_systems", "grids", "transceivers",
                       "data_centers", "disaster", "workflow_durations", "seed"},
                      "scenario");

  Scenario s;
  const json& seed = req(doc, "seed", "scenario");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    raise(ErrorKind::Schema, "scenario.seed must be a non-negative integer");
  }
  if (seed.is_number_integer() && seed.get<std::int64_t>() < 0) {
    raise(ErrorKind::Invariant, "scenario.seed must be >= 0");
  }
  s.seed = seed.get<std::uint64_t>();

  for (const auto& oj : req_array(doc, "operators", "scenario")) {
    expect_object(oj, "operators[]");
    reject_unknown_keys(oj, {"id", "token"}, "operators[]");
    s.operators.push_back({req_string(oj, "id", "operators[]"),
                           req_string(oj, "token", "operators[]")});
  }
  if (s.operators.empty()) raise(ErrorKind::Invariant, "at least one operator required");

  for (const auto& nj : req_array(doc, "nodes", "scenario")) {
    expect_object(nj, "nodes[]");
    reject_unknown_keys(nj, {"id", "site", "operator_id"}, "nodes[]");
    s.nodes.push_back({req_string(nj, "id", "nodes[]"), req_string(nj, "site", "nodes[]"),
                       req_string(nj, "operator_id", "nodes[]")});
  }

  for (const auto& gj : req_array(doc, "grids", "scenario")) {
    expect_object(gj, "grids[]");
    reject_unknown_keys(gj, {"id", "anchor_freq_thz", "slot_spacing_ghz", "slot_count"},
                        "grids[]");
    SpectrumGrid g;
    g.id = req_string(gj, "id", "grids[]");
    g.anchor_freq_thz = req_number(gj, "anchor_freq_thz", "grids[]");
    g.slot_spacing_ghz = req_number(gj, "slot_spacing_ghz", "grids[]");
    g.slot_count = req_int(gj, "slot_count", "grids[]");
    if (g.slot_spacing_ghz <= 0.0) {
      raise(ErrorKind::Invariant, "grid " + g.id + ": slot_spacing_ghz must be > 0");
    }
    if (g.slot_count < 1) {
      raise(ErrorKind::Invariant, "grid " + g.id + ": slot_count must be >= 1");
    }
    s.grids.push_back(g);
  }

  // line systems need slot counts for ripple length checks
  auto grid_slot_count = [&](const std::string& grid_id, const std::string& where) {
    for (const auto& g : s.grids) {
      if (g.id == grid_id) return g.slot_count;
    }
    raise(ErrorKind::Reference, where + ": unknown grid \"" + grid_id + "\"");
  };

  for (const auto& lj : req_array(doc, "line_systems", "scenario")) {
    expect_object(lj, "line_systems[]");
    reject_unknown_keys(lj,
                        {"id", "operator_id", "endpoints", "grid_id", "booster",
                         "spans", "ilas", "preamp", "endpoint_instruments"},
                        "line_systems[]");
    LineSystem line;
    line.id = req_string(lj, "id", "line_systems[]");
    const std::string where = "line_systems[" + line.id + "]";
    line.operator_id = req_string(lj, "operator_id", where);
    const json& eps = req_array(lj, "endpoints", where);
    if (eps.size() != 2) raise(ErrorKind::Schema, where + ".endpoints must have 2 node ids");
    line.endpoints = {eps[0].get<std::string>(), eps[1].get<std::string>()};
    line.grid_id = req_string(lj, "grid_id", where);
    int slot_count = grid_slot_count(line.grid_id, where);
    line.booster = parse_edfa(req(lj, "booster", where), where + ".booster", slot_count);
    line.preamp = parse_edfa(req(lj, "preamp", where), where + ".preamp", slot_count);
    for (const auto& sj : req_array(lj, "spans", where)) {
      line.spans.push_back(parse_span(sj, where + ".spans[]"));
    }
    for (const auto& aj : req_array(lj, "ilas", where)) {
      line.ilas.push_back(parse_edfa(aj, where + ".ilas[]", slot_count));
    }
    const json& instr = req(lj, "endpoint_instruments", where);
    expect_object(instr, where + ".endpoint_instruments");
    for (auto it = instr.begin(); it != instr.end(); ++it) {
      expect_object(it.value(), where + ".endpoint_instruments." + it.key());
      reject_unknown_keys(it.value(), {"osa", "ase_source"},
                          where + ".endpoint_instruments." + it.key());
      EndpointInstruments ei;
      ei.osa = opt_bool(it.value(), "osa", false);
      ei.ase_source = opt_bool(it.value(), "ase_source", false);
      line.endpoint_instruments[it.key()] = ei;
    }

    if (line.spans.empty()) raise(ErrorKind::Invariant, where + ": at least one span required");
    if (line.ilas.size() != line.spans.size() - 1) {
      raise(ErrorKind::Invariant,
            where + ": ILA count " + std::to_string(line.ilas.size()) +
                " must equal span count - 1 (" + std::to_string(line.spans.size() - 1) + ")");
    }
    s.line_systems.push_back(std::move(line));
  }

  const json& trx = req(doc, "transceivers", "scenario");
  expect_object(trx, "transceivers");
  reject_unknown_keys(trx, {"formats", "ports"}, "transceivers");
  for (const auto& fj : req_array(trx, "formats", "transceivers")) {
    expect_object(fj, "formats[]");
    reject_unknown_keys(fj,
                        {"id", "bits_per_symbol_per_pol", "ber_curve", "net_rate_gbps",
                         "symbol_rate_gbd"},
                        "formats[]");
    ModulationFormat f;
    f.id = req_string(fj, "id", "formats[]");
    f.bits_per_symbol_per_pol = req_number(fj, "bits_per_symbol_per_pol", "formats[]");
    f.ber_curve = req_string(fj, "ber_curve", "formats[]");
    f.net_rate_gbps = req_number(fj, "net_rate_gbps", "formats[]");
    f.symbol_rate_gbd = req_number(fj, "symbol_rate_gbd", "formats[]");
    if (f.net_rate_gbps <= 0.0) {
      raise(ErrorKind::Invariant, "format " + f.id + ": net_rate_gbps must be > 0");
    }
    if (f.ber_curve != "dp-qpsk" && f.ber_curve != "dp-16qam") {
      raise(ErrorKind::Invariant, "format " + f.id + ": unknown ber_curve " + f.ber_curve);
    }
    if (f.symbol_rate_gbd <= 0.0) {
      raise(ErrorKind::Invariant, "format " + f.id + ": symbol_rate_gbd must be > 0");
    }
    s.formats.push_back(f);
  }
  for (const auto& pj : req_array(trx, "ports", "transceivers")) {
    expect_object(pj, "ports[]");
    reject_unknown_keys(pj,
                        {"id", "owner_operator", "node_id", "supported_format_ids",
                         "snr_trx_true_db"},
                        "ports[]");
    TransceiverPort p;
    p.id = req_string(pj, "id", "ports[]");
    p.owner_operator = req_string(pj, "owner_operator", "ports[]");
    p.node_id = req_string(pj, "node_id", "ports[]");
    for (const auto& v : req_array(pj, "supported_format_ids", "ports[]")) {
      p.supported_format_ids.push_back(v.get<std::string>());
    }
    p.snr_trx_true_db = req_number(pj, "snr_trx_true_db", "ports[]");
    if (!std::isfinite(p.snr_trx_true_db)) {
      raise(ErrorKind::Invariant, "port " + p.id + ": snr_trx_true_db must be finite");
    }
    s.transceivers.push_back(p);
  }

  for (const auto& dj : req_array(doc, "data_centers", "scenario")) {
    expect_object(dj, "data_centers[]");
    reject_unknown_keys(dj,
                        {"id", "operator_id", "site", "power_state",
                         "fuel_hours_remaining", "datasets"},
                        "data_centers[]");
    DataCenter dc;
    dc.id = req_string(dj, "id", "data_centers[]");
    dc.operator_id = req_string(dj, "operator_id", "data_centers[]");
    dc.site = req_string(dj, "site", "data_centers[]");
    dc.power_state = power_state_from_name(req_string(dj, "power_state", "data_centers[]"));
    dc.fuel_hours_remaining = req_number(dj, "fuel_hours_remaining", "data_centers[]");
    for (const auto& dsj : req_array(dj, "datasets", "data_centers[]")) {
      expect_object(dsj, "datasets[]");
      reject_unknown_keys(dsj, {"id", "size_gb"}, "datasets[]");
      dc.datasets.push_back({req_string(dsj, "id", "datasets[]"),
                             req_number(dsj, "size_gb", "datasets[]")});
    }
    if (dc.fuel_hours_remaining < 0.0) {
      raise(ErrorKind::Invariant, "data center " + dc.id + ": fuel_hours_remaining < 0");
    }
    if (dc.power_state == PowerState::Generator && dc.fuel_hours_remaining <= 0.0) {
      raise(ErrorKind::Invariant,
            "data center " + dc.id + ": generator power requires fuel_hours_remaining > 0");
    }
    s.data_centers.push_back(std::move(dc));
  }

  const json& dis = req(doc, "disaster", "scenario");
  expect_object(dis, "disaster");
  reject_unknown_keys(dis,
                      {"affected_site", "outage_duration_hours", "fuel_hours",
                       "fuel_override"},
                      "disaster");
  s.disaster.affected_site = req_string(dis, "affected_site", "disaster");
  s.disaster.outage_duration_hours = req_number(dis, "outage_duration_hours", "disaster");
  s.disaster.fuel_hours = req_number(dis, "fuel_hours", "disaster");
  s.disaster.fuel_override = opt_bool(dis, "fuel_override", false);
  if (!s.disaster.fuel_override &&
      (s.disaster.fuel_hours < 8.0 || s.disaster.fuel_hours > 24.0)) {
    raise(ErrorKind::Invariant,
          "disaster.fuel_hours " + std::to_string(s.disaster.fuel_hours) +
              " outside [8, 24] h without fuel_override");
  }
  if (s.disaster.fuel_hours <= 0.0) {
    raise(ErrorKind::Invariant, "disaster.fuel_hours must be > 0");
  }

  const json& wd = req(doc, "workflow_durations", "scenario");
  expect_object(wd, "workflow_durations");
  reject_unknown_keys(wd,
                      {"trx_characterization_min", "dlm_measure_min", "dlm_analyze_min",
                       "ols_measure_min", "ols_analyze_min", "dlm_validate_min",
                       "trx_configure_min", "migrate_min"},
                      "workflow_durations");
  WorkflowDurations& w = s.workflow_durations;
  w.trx_characterization_min = req_number(wd, "trx_characterization_min", "workflow_durations");
  w.dlm_measure_min = req_number(wd, "dlm_measure_min", "workflow_durations");
  w.dlm_analyze_min = req_number(wd, "dlm_analyze_min", "workflow_durations");
  w.ols_measure_min = req_number(wd, "ols_measure_min", "workflow_durations");
  w.ols_analyze_min = req_number(wd, "ols_analyze_min", "workflow_durations");
  w.dlm_validate_min = req_number(wd, "dlm_validate_min", "workflow_durations");
  w.trx_configure_min = req_number(wd, "trx_configure_min", "workflow_durations");
  w.migrate_min = req_number(wd, "migrate_min", "workflow_durations");

  // --- cross references ------------------------------------------------------
  auto require_operator = [&](const std::string& id, const std::string& where) {
    for (const auto& o : s.operators) {
      if (o.id == id) return;
    }
    raise(ErrorKind::Reference, where + ": unknown operator \"" + id + "\"");
  };
  auto require_node = [&](const std::string& id, const std::string& where) {
    for (const auto& n : s.nodes) {
      if (n.id == id) return;
    }
    raise(ErrorKind::Reference, where + ": unknown node \"" + id + "\"");
  };

  std::set<std::string> tokens;
  for (const auto& o : s.operators) {
    if (!tokens.insert(o.token).second) {
      raise(ErrorKind::Invariant, "operator tokens must be unique");
    }
  }
  for (const auto& n : s.nodes) require_operator(n.operator_id, "node " + n.id);
  for (const auto& line : s.line_systems) {
    require_operator(line.operator_id, "line " + line.id);
    require_node(line.endpoints[0], "line " + line.id);
    require_node(line.endpoints[1], "line " + line.id);
    for (const auto& [end, _] : line.endpoint_instruments) {
      if (end != line.endpoints[0] && end != line.endpoints[1]) {
        raise(ErrorKind::Reference,
              "line " + line.id + ": instruments listed for non-endpoint \"" + end + "\"");
      }
    }
  }
  for (const auto& p : s.transceivers) {
    require_operator(p.owner_operator, "port " + p.id);
    require_node(p.node_id, "port " + p.id);
    for (const auto& f : p.supported_format_ids) {
      bool found = false;
      for (const auto& fmt : s.formats) found = found || fmt.id == f;
      if (!found) raise(ErrorKind::Reference, "port " + p.id + ": unknown format \"" + f + "\"");
    }
  }
  for (const auto& dc : s.data_centers) require_operator(dc.operator_id, "data center " + dc.id);
  {
    bool site_found = false;
    for (const auto& dc : s.data_centers) {
      site_found = site_found || dc.site == s.disaster.affected_site;
    }
    for (const auto& n : s.nodes) site_found = site_found || n.site == s.disaster.affected_site;
    if (!site_found) {
      raise(ErrorKind::Reference,
            "disaster.affected_site \"" + s.disaster.affected_site + "\" matches no site");
    }
  }

  // Affected generator-backed data centers inherit the disaster fuel budget.
  for (auto& dc : s.data_centers) {
    if (dc.site == s.disaster.affected_site && dc.power_state == PowerState::Generator) {
      dc.fuel_hours_remaining = s.disaster.fuel_hours;
    }
  }
  return s;
}

namespace {

json edfa_to_json(const Edfa& e) {
  json j;
  j["id"] = e.id;
  j["gain_db"] = e.gain_db;
  j["tilt_db"] = e.tilt_db;
  j["noise_figure_db"] = e.noise_figure_db;
  j["gain_range_db"] = {e.gain_range_db[0], e.gain_range_db[1]};
  j["max_total_output_dbm"] = e.max_total_output_dbm;
  if (!e.gain_ripple_db.empty()) j["gain_ripple_db"] = e.gain_ripple_db;
  return j;
}

json span_to_json(const FiberSpan& s) {
  json j;
  j["id"] = s.id;
  j["length_km"] = s.length_km;
  j["attenuation_db_per_km"] = s.attenuation_db_per_km;
  j["dispersion_beta2_ps2_km"] = s.dispersion_beta2_ps2_km;
  j["nonlinear_gamma_per_w_km"] = s.nonlinear_gamma_per_w_km;
  if (!s.lumped_losses.empty()) {
    json arr = json::array();
    for (const auto& l : s.lumped_losses) {
      arr.push_back({{"position_km", l.position_km}, {"loss_db", l.loss_db}});
    }
    j["lumped_losses"] = arr;
  }
  return j;
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["seed"] = s.seed;
  json ops = json::array();
  for (const auto& o : s.operators) ops.push_back({{"id", o.id}, {"token", o.token}});
  doc["operators"] = ops;
  json nodes = json::array();
  for (const auto& n : s.nodes) {
    nodes.push_back({{"id", n.id}, {"site", n.site}, {"operator_id", n.operator_id}});
  }
  doc["nodes"] = nodes;
  json grids = json::array();
  for (const auto& g : s.grids) {
    grids.push_back({{"id", g.id},
                     {"anchor_freq_thz", g.anchor_freq_thz},
                     {"slot_spacing_ghz", g.slot_spacing_ghz},
                     {"slot_count", g.slot_count}});
  }
  doc["grids"] = grids;
  json lines = json::array();
  for (const auto& line : s.line_systems) {
    json lj;
    lj["id"] = line.id;
    lj["operator_id"] = line.operator_id;
    lj["endpoints"] = {line.endpoints[0], line.endpoints[1]};
    lj["grid_id"] = line.grid_id;
    lj["booster"] = edfa_to_json(line.booster);
    lj["preamp"] = edfa_to_json(line.preamp);
    json spans = json::array();
    for (const auto& sp : line.spans) spans.push_back(span_to_json(sp));
    lj["spans"] = spans;
    json ilas = json::array();
    for (const auto& a : line.ilas) ilas.push_back(edfa_to_json(a));
    lj["ilas"] = ilas;
    json instr;
    for (const auto& [end, ei] : line.endpoint_instruments) {
      instr[end] = {{"osa", ei.osa}, {"ase_source", ei.ase_source}};
    }
    lj["endpoint_instruments"] = instr;
    lines.push_back(lj);
  }
  doc["line_systems"] = lines;
  json trx;
  json formats = json::array();
  for (const auto& f : s.formats) {
    formats.push_back({{"id", f.id},
                       {"bits_per_symbol_per_pol", f.bits_per_symbol_per_pol},
                       {"ber_curve", f.ber_curve},
                       {"net_rate_gbps", f.net_rate_gbps},
                       {"symbol_rate_gbd", f.symbol_rate_gbd}});
  }
  trx["formats"] = formats;
  json ports = json::array();
  for (const auto& p : s.transceivers) {
    ports.push_back({{"id", p.id},
                     {"owner_operator", p.owner_operator},
                     {"node_id", p.node_id},
                     {"supported_format_ids", p.supported_format_ids},
                     {"snr_trx_true_db", p.snr_trx_true_db}});
  }
  trx["ports"] = ports;
  doc["transceivers"] = trx;
  json dcs = json::array();
  for (const auto& dc : s.data_centers) {
    json dj;
    dj["id"] = dc.id;
    dj["operator_id"] = dc.operator_id;
    dj["site"] = dc.site;
    dj["power_state"] = power_state_name(dc.power_state);
    dj["fuel_hours_remaining"] = dc.fuel_hours_remaining;
    json ds = json::array();
    for (const auto& d : dc.datasets) ds.push_back({{"id", d.id}, {"size_gb", d.size_gb}});
    dj["datasets"] = ds;
    dcs.push_back(dj);
  }
  doc["data_centers"] = dcs;
  doc["disaster"] = {{"affected_site", s.disaster.affected_site},
                     {"outage_duration_hours", s.disaster.outage_duration_hours},
                     {"fuel_hours", s.disaster.fuel_hours},
                     {"fuel_override", s.disaster.fuel_override}};
  const WorkflowDurations& w = s.workflow_durations;
  doc["workflow_durations"] = {{"trx_characterization_min", w.trx_characterization_min},
                               {"dlm_measure_min", w.dlm_measure_min},
                               {"dlm_analyze_min", w.dlm_analyze_min},
                               {"ols_measure_min", w.ols_measure_min},
                               {"ols_analyze_min", w.ols_analyze_min},
                               {"dlm_validate_min", w.dlm_validate_min},
                               {"trx_configure_min", w.trx_configure_min},
                               {"migrate_min", w.migrate_min}};
  return canonical_dump(doc);
}

bool scenarios_equal(const Scenario& a, const Scenario& b) {
  return serialize_scenario(a) == serialize_scenario(b);
}

// ---------------------------------------------------------------------------
// Reference scenario
// ---------------------------------------------------------------------------

namespace {

std::vector<double> make_ripple(const ReferenceScenarioOptions& o, int slot_count,
                                int amp_index) {
  RngStream rng(o.seed, "scenario.ripple", static_cast<std::uint64_t>(amp_index));
  double linear = rng.uniform(-o.ripple_linear_max_db, o.ripple_linear_max_db);
  std::vector<double> r(static_cast<size_t>(slot_count));
  for (int s = 0; s < slot_count; ++s) {
    double fn = (slot_count > 1)
                    ? (static_cast<double>(s) / (slot_count - 1) - 0.5)
                    : 0.0;
    r[static_cast<size_t>(s)] = linear * fn + rng.clipped_normal(o.ripple_sigma_db);
  }
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(slot_count);
  for (double& v : r) v -= mean;
  return r;
}

Edfa make_amp(const ReferenceScenarioOptions& o, const std::string& id, int amp_index,
              int slot_count, double gain_db) {
  RngStream rng(o.seed, "scenario.nf", static_cast<std::uint64_t>(amp_index));
  Edfa e;
  e.id = id;
  e.gain_db = gain_db;
  e.tilt_db = 0.0;
  e.noise_figure_db = o.amp_noise_figure_db + rng.uniform(-o.nf_spread_db, o.nf_spread_db);
  e.gain_ripple_db = make_ripple(o, slot_count, amp_index);
  e.gain_range_db = {o.gain_range_min_db, o.gain_range_max_db};
  e.max_total_output_dbm = o.max_total_output_dbm;
  return e;
}

}  // namespace

Scenario make_reference_scenario(const ReferenceScenarioOptions& opts) {
  Scenario s;
  s.seed = opts.seed;
  s.operators = {{"op_a", "token-op-a"}, {"op_b", "token-op-b"}};
  s.nodes = {{"west_hub", "site_x", "op_b"},
             {"east_hub", "site_y", "op_b"},
             {"metro_pop", "site_y", "op_b"}};

  SpectrumGrid grid;
  grid.id = "cband";
  grid.anchor_freq_thz = 191.35;
  grid.slot_spacing_ghz = 100.0;
  grid.slot_count = 48;
  s.grids.push_back(grid);

  LineSystem longhaul;
  longhaul.id = "longhaul";
  longhaul.operator_id = "op_b";
  longhaul.endpoints = {"west_hub", "east_hub"};
  longhaul.grid_id = "cband";
  double nominal_gain = opts.amp_gain_db;
  longhaul.booster = make_amp(opts, "longhaul-booster", 0, grid.slot_count, nominal_gain);
  for (int i = 0; i < opts.span_count; ++i) {
    FiberSpan sp;
    sp.id = "longhaul-span" + std::to_string(i);
    sp.length_km = opts.span_length_km;
    sp.attenuation_db_per_km = opts.attenuation_db_per_km;
    sp.dispersion_beta2_ps2_km = opts.dispersion_beta2_ps2_km;
    sp.nonlinear_gamma_per_w_km = opts.nonlinear_gamma_per_w_km;
    longhaul.spans.push_back(sp);
  }
  for (const auto& [span_idx, pos_km, loss_db] : opts.extra_losses) {
    if (span_idx >= 0 && span_idx < static_cast<int>(longhaul.spans.size())) {
      longhaul.spans[static_cast<size_t>(span_idx)].lumped_losses.push_back(
          {pos_km, loss_db});
    }
  }
  for (int i = 0; i < opts.span_count - 1; ++i) {
    longhaul.ilas.push_back(
        make_amp(opts, "longhaul-ila" + std::to_string(i), i + 1, grid.slot_count,
                 nominal_gain));
  }
  longhaul.preamp =
      make_amp(opts, "longhaul-preamp", opts.span_count, grid.slot_count, nominal_gain);
  longhaul.endpoint_instruments["west_hub"] = {true, true};
  longhaul.endpoint_instruments["east_hub"] = {true, true};
  s.line_systems.push_back(std::move(longhaul));

  LineSystem metro;
  metro.id = "metro";
  metro.operator_id = "op_b";
  metro.endpoints = {"east_hub", "metro_pop"};
  metro.grid_id = "cband";
  metro.booster = make_amp(opts, "metro-booster", 100, grid.slot_count, 10.0);
  FiberSpan spool;
  spool.id = "metro-span0";
  spool.length_km = 50.0;
  spool.attenuation_db_per_km = 0.2;
  spool.dispersion_beta2_ps2_km = opts.dispersion_beta2_ps2_km;
  spool.nonlinear_gamma_per_w_km = opts.nonlinear_gamma_per_w_km;
  metro.spans.push_back(spool);
  metro.preamp = make_amp(opts, "metro-preamp", 101, grid.slot_count, 10.0);
  metro.endpoint_instruments["east_hub"] = {true, false};
  metro.endpoint_instruments["metro_pop"] = {false, false};
  s.line_systems.push_back(std::move(metro));

  s.formats = {{"dp16qam_800g", 4.0, "dp-16qam", 800.0, 130.0},
               {"dp16qam_400g", 4.0, "dp-16qam", 400.0, 63.1}};

  auto add_ports = [&](const std::string& node, const std::string& prefix) {
    for (int i = 1; i <= 2; ++i) {
      s.transceivers.push_back({prefix + "_800_" + std::to_string(i), "op_b", node,
                                {"dp16qam_800g", "dp16qam_400g"}, opts.trx_snr_800g_db,
                                std::nullopt, std::nullopt});
    }
    for (int i = 1; i <= 4; ++i) {
      s.transceivers.push_back({prefix + "_400_" + std::to_string(i), "op_b", node,
                                {"dp16qam_400g"}, opts.trx_snr_400g_db, std::nullopt,
                                std::nullopt});
    }
  };
  add_ports("west_hub", "wh");
  add_ports("east_hub", "eh");

  s.data_centers = {{"dc_west", "op_a", "site_x", PowerState::Generator, opts.fuel_hours,
                     {{"critical_db", 25.0}}},
                    {"dc_east", "op_b", "site_y", PowerState::Grid, 0.0, {}}};

  s.disaster = {"site_x", 24.0, opts.fuel_hours, opts.fuel_override};
  s.workflow_durations = WorkflowDurations{};
  return s;
}

ChannelPlan make_comb_plan(const SpectrumGrid& grid, double launch_dbm,
                           double dummy_symbol_rate_gbd) {
  ChannelPlan plan;
  for (int slot = 1; slot + 1 < grid.slot_count; ++slot) {
    Channel c;
    c.slot_index = slot;
    c.width_slots = 1;
    c.symbol_rate_gbd = dummy_symbol_rate_gbd;
    c.role = ChannelRole::Dummy;
    c.launch_power_dbm = launch_dbm;
    plan.channels.push_back(c);
  }
  return plan;
}

}  // namespace optwin
