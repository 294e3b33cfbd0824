#include "optwin/model.hpp"

#include <algorithm>

namespace optwin {

const char* channel_role_name(ChannelRole role) {
  switch (role) {
    case ChannelRole::Traffic: return "traffic";
    case ChannelRole::Dummy: return "dummy";
    case ChannelRole::Probe: return "probe";
  }
  return "unknown";
}

ChannelRole channel_role_from_name(const std::string& name) {
  if (name == "traffic") return ChannelRole::Traffic;
  if (name == "dummy") return ChannelRole::Dummy;
  if (name == "probe") return ChannelRole::Probe;
  raise(ErrorKind::Schema, "unknown channel role: " + name);
}

const char* power_state_name(PowerState s) {
  switch (s) {
    case PowerState::Grid: return "grid";
    case PowerState::Generator: return "generator";
    case PowerState::Down: return "down";
  }
  return "unknown";
}

PowerState power_state_from_name(const std::string& name) {
  if (name == "grid") return PowerState::Grid;
  if (name == "generator") return PowerState::Generator;
  if (name == "down") return PowerState::Down;
  raise(ErrorKind::Schema, "unknown power state: " + name);
}

namespace {

template <typename T>
const T& find_by_id(const std::vector<T>& items, const std::string& id,
                    const char* what) {
  for (const auto& item : items) {
    if (item.id == id) return item;
  }
  raise(ErrorKind::NotFound, std::string(what) + " not found: " + id);
}

}  // namespace

const SpectrumGrid& Scenario::grid(const std::string& id) const {
  return find_by_id(grids, id, "grid");
}

const LineSystem& Scenario::line(const std::string& id) const {
  return find_by_id(line_systems, id, "line system");
}

const ModulationFormat& Scenario::format(const std::string& id) const {
  return find_by_id(formats, id, "modulation format");
}

const TransceiverPort& Scenario::port(const std::string& id) const {
  return find_by_id(transceivers, id, "transceiver port");
}

const DataCenter& Scenario::data_center(const std::string& id) const {
  return find_by_id(data_centers, id, "data center");
}

PublicLineSpecs public_specs(const LineSystem& line, const SpectrumGrid& grid) {
  PublicLineSpecs specs;
  specs.line_id = line.id;
  specs.grid = grid;
  specs.ila_count = static_cast<int>(line.ilas.size());
  for (const auto& s : line.spans) {
    specs.span_beta2_ps2_km.push_back(s.dispersion_beta2_ps2_km);
    specs.span_gamma_per_w_km.push_back(s.nonlinear_gamma_per_w_km);
  }
  for (const Edfa* a : line.amps()) {
    specs.amp_gain_range_db.push_back(a->gain_range_db);
    specs.amp_max_total_output_dbm.push_back(a->max_total_output_dbm);
  }
  specs.measurement_slots = {0, grid.slot_count - 1};
  return specs;
}

double carrier_frequency_thz(const SpectrumGrid& grid, int slot) {
  return grid.carrier_thz(slot);
}

double total_length_km(const LineSystem& line) { return line.total_length_km(); }

}  // namespace optwin
