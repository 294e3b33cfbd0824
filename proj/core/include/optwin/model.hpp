#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optwin/errors.hpp"
#include "optwin/units.hpp"

namespace optwin {

// ---------------------------------------------------------------------------
// Spectrum grid
// ---------------------------------------------------------------------------

struct SpectrumGrid {
  std::string id;
  double anchor_freq_thz = 0.0;  // center frequency of slot 0
  double slot_spacing_ghz = 0.0;
  int slot_count = 0;

  double carrier_hz(int slot) const {
    if (slot < 0 || slot >= slot_count) {
      raise(ErrorKind::Domain, "slot " + std::to_string(slot) +
                                   " outside grid of " + std::to_string(slot_count) +
                                   " slots");
    }
    return thz_to_hz(anchor_freq_thz) + slot * ghz_to_hz(slot_spacing_ghz);
  }

  double carrier_thz(int slot) const { return hz_to_thz(carrier_hz(slot)); }

  double band_width_hz() const { return slot_count * ghz_to_hz(slot_spacing_ghz); }

  // Normalized frequency in [-0.5, +0.5] across the carrier range; the unit
  // in which amplifier tilt (edge-to-edge dB) is applied.
  double normalized_freq(double freq_hz) const {
    double lo = thz_to_hz(anchor_freq_thz);
    double hi = lo + (slot_count - 1) * ghz_to_hz(slot_spacing_ghz);
    if (hi <= lo) return 0.0;
    return (freq_hz - 0.5 * (lo + hi)) / (hi - lo);
  }
};

// ---------------------------------------------------------------------------
// Channels and modulation
// ---------------------------------------------------------------------------

enum class ChannelRole { Traffic, Dummy, Probe };

const char* channel_role_name(ChannelRole role);
ChannelRole channel_role_from_name(const std::string& name);

struct ModulationFormat {
  std::string id;
  double bits_per_symbol_per_pol = 0.0;
  std::string ber_curve;  // "dp-qpsk" or "dp-16qam"
  double net_rate_gbps = 0.0;
  double symbol_rate_gbd = 0.0;  // nominal operating symbol rate
};

struct Channel {
  int slot_index = 0;   // first occupied slot
  int width_slots = 1;  // symbol rate may exceed one slot spacing
  double symbol_rate_gbd = 0.0;
  ChannelRole role = ChannelRole::Dummy;
  std::string format_id;  // empty for dummy channels
  double launch_power_dbm = 0.0;  // per channel, at the booster input
  bool locked = false;            // dummy that may not be displaced by traffic

  double symbol_rate_hz() const { return symbol_rate_gbd * 1e9; }

  double center_freq_hz(const SpectrumGrid& grid) const {
    return grid.carrier_hz(slot_index) +
           0.5 * (width_slots - 1) * ghz_to_hz(grid.slot_spacing_ghz);
  }

  int last_slot() const { return slot_index + width_slots - 1; }
};

struct ChannelPlan {
  std::vector<Channel> channels;  // sorted by slot_index, non-overlapping

  const Channel* at_slot(int slot) const {
    for (const auto& c : channels) {
      if (slot >= c.slot_index && slot <= c.last_slot()) return &c;
    }
    return nullptr;
  }

  int index_of_slot(int slot) const {
    for (size_t i = 0; i < channels.size(); ++i) {
      if (channels[i].slot_index == slot) return static_cast<int>(i);
    }
    return -1;
  }
};

// ---------------------------------------------------------------------------
// Line elements
// ---------------------------------------------------------------------------

struct LumpedLoss {
  double position_km = 0.0;
  double loss_db = 0.0;
};

struct FiberSpan {
  std::string id;
  double length_km = 0.0;
  double attenuation_db_per_km = 0.0;
  double dispersion_beta2_ps2_km = 0.0;  // magnitude; anomalous dispersion
  double nonlinear_gamma_per_w_km = 0.0;
  std::vector<LumpedLoss> lumped_losses;  // hidden ground truth

  double total_loss_db() const {
    double loss = attenuation_db_per_km * length_km;
    for (const auto& l : lumped_losses) loss += l.loss_db;
    return loss;
  }
};

struct Edfa {
  std::string id;
  double gain_db = 0.0;  // configured operating point at scenario load
  double tilt_db = 0.0;  // configured edge-to-edge tilt
  double noise_figure_db = 5.0;            // hidden ground truth
  std::vector<double> gain_ripple_db;      // hidden ground truth, per slot, zero mean
  std::array<double, 2> gain_range_db = {0.0, 30.0};
  double max_total_output_dbm = 23.0;

  double ripple_at(int slot) const {
    if (slot < 0 || slot >= static_cast<int>(gain_ripple_db.size())) return 0.0;
    return gain_ripple_db[static_cast<size_t>(slot)];
  }
};

struct EndpointInstruments {
  bool osa = false;
  bool ase_source = false;
};

struct LineSystem {
  std::string id;
  std::string operator_id;
  std::array<std::string, 2> endpoints;  // node ids, signal direction 0 -> 1
  std::string grid_id;
  Edfa booster;
  std::vector<FiberSpan> spans;
  std::vector<Edfa> ilas;  // ILA count = span count - 1
  Edfa preamp;
  std::map<std::string, EndpointInstruments> endpoint_instruments;

  double total_length_km() const {
    double sum = 0.0;
    for (const auto& s : spans) sum += s.length_km;
    return sum;
  }

  int amp_count() const { return static_cast<int>(ilas.size()) + 2; }

  // Amps in propagation order: booster, ILAs, preamp.
  std::vector<const Edfa*> amps() const {
    std::vector<const Edfa*> out;
    out.push_back(&booster);
    for (const auto& a : ilas) out.push_back(&a);
    out.push_back(&preamp);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Transceivers, data centers, scenario
// ---------------------------------------------------------------------------

struct PortConfig {
  int slot_index = 0;
  std::string format_id;
  double launch_power_dbm = 0.0;
};

struct TransceiverPort {
  std::string id;
  std::string owner_operator;
  std::string node_id;
  std::vector<std::string> supported_format_ids;
  double snr_trx_true_db = 0.0;  // hidden ground truth
  std::optional<std::string> delegation_id;
  std::optional<PortConfig> config;
};

enum class PowerState { Grid, Generator, Down };

const char* power_state_name(PowerState s);
PowerState power_state_from_name(const std::string& name);

struct Dataset {
  std::string id;
  double size_gb = 0.0;
};

struct DataCenter {
  std::string id;
  std::string operator_id;
  std::string site;
  PowerState power_state = PowerState::Grid;
  double fuel_hours_remaining = 0.0;
  std::vector<Dataset> datasets;
};

struct Operator {
  std::string id;
  std::string token;
};

struct NetworkNode {
  std::string id;
  std::string site;
  std::string operator_id;
};

struct Disaster {
  std::string affected_site;
  double outage_duration_hours = 0.0;
  double fuel_hours = 0.0;
  bool fuel_override = false;  // allows fuel outside the 8..24 h assumption
};

struct WorkflowDurations {
  double trx_characterization_min = 30.0;
  double dlm_measure_min = 20.0;
  double dlm_analyze_min = 40.0;
  double ols_measure_min = 150.0;
  double ols_analyze_min = 60.0;
  double dlm_validate_min = 60.0;
  double trx_configure_min = 2.0;
  double migrate_min = 10.0;

  double total_min() const {
    return trx_characterization_min + dlm_measure_min + dlm_analyze_min +
           ols_measure_min + ols_analyze_min + dlm_validate_min +
           trx_configure_min + migrate_min;
  }
};

struct Scenario {
  std::uint64_t seed = 0;
  std::vector<Operator> operators;
  std::vector<NetworkNode> nodes;
  std::vector<SpectrumGrid> grids;
  std::vector<LineSystem> line_systems;
  std::vector<ModulationFormat> formats;
  std::vector<TransceiverPort> transceivers;
  std::vector<DataCenter> data_centers;
  Disaster disaster;
  WorkflowDurations workflow_durations;

  const SpectrumGrid& grid(const std::string& id) const;
  const LineSystem& line(const std::string& id) const;
  const ModulationFormat& format(const std::string& id) const;
  const TransceiverPort& port(const std::string& id) const;
  const DataCenter& data_center(const std::string& id) const;
};

// Public device/fiber data an estimator may legitimately use: inventory
// counts, published device limits, nominal fiber constants, and the grid.
// Hidden ground truth (attenuation, lumped losses, noise figure, ripple,
// transceiver noise) is deliberately absent.
struct PublicLineSpecs {
  std::string line_id;
  SpectrumGrid grid;
  int ila_count = 0;
  std::vector<double> span_beta2_ps2_km;
  std::vector<double> span_gamma_per_w_km;
  std::vector<std::array<double, 2>> amp_gain_range_db;  // booster, ILAs, preamp
  std::vector<double> amp_max_total_output_dbm;
  std::array<int, 2> measurement_slots = {0, 0};  // dummy-free guard slots
};

PublicLineSpecs public_specs(const LineSystem& line, const SpectrumGrid& grid);

// carrier(grid, slot) in THz; the grid arithmetic entry point used by the
// scenario tooling.
double carrier_frequency_thz(const SpectrumGrid& grid, int slot);

double total_length_km(const LineSystem& line);

}  // namespace optwin
