#include "optwin/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "optwin/json_io.hpp"
#include "optwin/log.hpp"
#include "optwin/rng.hpp"
#include "optwin/scenario.hpp"
#include "serial.hpp"

namespace optwin::orchestrator {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Succeeded: return "succeeded";
    case Outcome::DeadlineExceeded: return "deadline_exceeded";
    case Outcome::Infeasible: return "infeasible";
  }
  return "unknown";
}

bool fuel_exhausted_at(double elapsed_min, double fuel_hours) {
  return elapsed_min >= fuel_hours * 60.0 - 1e-6;
}

FuelStatus fuel_check(double elapsed_min, const DataCenter& dc) {
  if (dc.power_state != PowerState::Generator) return FuelStatus::Ok;
  return fuel_exhausted_at(elapsed_min, dc.fuel_hours_remaining) ? FuelStatus::Exhausted
                                                                 : FuelStatus::Ok;
}

MigrationSummary migrate_dataset(double size_gb, double capacity_gbps,
                                 double utilization, double setup_overhead_min) {
  if (capacity_gbps <= 0.0) raise(ErrorKind::Domain, "migration path has zero capacity");
  if (utilization <= 0.0 || utilization > 1.0) {
    raise(ErrorKind::Domain, "utilization must lie in (0, 1]");
  }
  if (size_gb < 0.0) raise(ErrorKind::Domain, "dataset size must be >= 0");
  MigrationSummary m;
  m.dataset_gb = size_gb;
  m.bytes = static_cast<std::uint64_t>(std::llround(size_gb * 1e9));
  m.capacity_gbps = capacity_gbps;
  m.utilization = utilization;
  m.setup_overhead_min = setup_overhead_min;
  m.transfer_s = size_gb * 1e9 * 8.0 / (capacity_gbps * 1e9 * utilization);
  m.duration_min = setup_overhead_min + m.transfer_s / 60.0;
  return m;
}

std::vector<LightpathOutcome> validate_designs(
    const std::vector<optimizer::LightpathDesign>& designs, const Scenario& scenario,
    const LineSystem& truth_line, const SpectrumGrid& grid,
    const qot::LineConfig& config, const ChannelPlan& plan, double noise_sigma_db,
    std::uint64_t seed) {
  qot::PropagationResult walk =
      qot::propagate_walk(qot::line_elements(truth_line), grid, config, plan);
  const qot::GsnrSpectrum& end = walk.taps.back().gsnr;

  std::vector<LightpathOutcome> outcomes;
  for (const auto& d : designs) {
    const qot::ChannelGsnr* at_slot = nullptr;
    for (size_t i = 0; i < plan.channels.size(); ++i) {
      if (plan.channels[i].slot_index == d.slot_index &&
          plan.channels[i].role == ChannelRole::Traffic) {
        at_slot = &end.channels[i];
      }
    }
    if (at_slot == nullptr) {
      raise(ErrorKind::NotFound,
            "design " + d.demand_id + " is not provisioned at slot " +
                std::to_string(d.slot_index));
    }
    double combined = qot::combine_with_transceiver(
        at_slot->gsnr_db, scenario.port(d.rx_port).snr_trx_true_db);
    RngStream rng(seed, "validate." + d.demand_id);
    double measured = combined;
    if (noise_sigma_db > 0.0) measured += rng.clipped_normal(noise_sigma_db);

    LightpathOutcome o;
    o.design = d;
    o.design_gsnr_db = d.predicted_gsnr_db - d.margin_db;
    o.measured_gsnr_db = measured;
    o.delta_db = measured - o.design_gsnr_db;
    outcomes.push_back(o);
  }
  return outcomes;
}

// ---------------------------------------------------------------------------
// Workflow
// ---------------------------------------------------------------------------

struct Workflow::Impl {
  Scenario scenario;
  RecoveryOptions options;
  std::uint64_t seed = 0;

  const LineSystem* line = nullptr;
  const SpectrumGrid* grid = nullptr;
  const DataCenter* affected_dc = nullptr;
  const DataCenter* dest_dc = nullptr;
  std::string lessee_op, owner_op;

  std::unique_ptr<control::ControlPlane> plane;
  control::Session lessee_session, owner_session;
  std::string lease_id;
  std::vector<optimizer::Demand> demands;
  std::vector<int> leased_slots;

  ChannelPlan comb_plan;        // dummies everywhere but the measurement slots
  ChannelPlan measurement_plan; // comb with the DLM probe channel
  qot::LineConfig initial_config;

  double clock_min = 0.0;
  std::vector<StepRecord> steps;
  bool stopped = false;
  Outcome outcome = Outcome::Succeeded;
  std::string failing_step, failure_detail;

  std::map<std::string, characterization::TrxEstimate> trx;
  telemetry::PowerProfile profile_before, profile_after;
  std::optional<characterization::LinkEstimate> link;
  std::optional<characterization::OlsEstimate> ols;
  std::optional<LineSystem> twin;
  std::optional<optimizer::OptimizationResult> optimum;
  std::optional<OptimizationSummary> opt_summary;
  std::vector<optimizer::LightpathDesign> designs;
  std::vector<LightpathOutcome> validations;
  std::optional<MigrationSummary> migration;
  ChannelPlan final_plan;
  qot::LineConfig final_config;
  FigureData figures;

  bool setup_done = false, characterized = false, calibrated = false,
       optimized = false, provisioned = false, migrated = false;

  // --- helpers --------------------------------------------------------------

  const ModulationFormat& best_format(const TransceiverPort& port) const {
    const ModulationFormat* best = nullptr;
    for (const auto& id : port.supported_format_ids) {
      const ModulationFormat& f = scenario.format(id);
      if (best == nullptr || f.net_rate_gbps > best->net_rate_gbps) best = &f;
    }
    if (best == nullptr) raise(ErrorKind::Invariant, "port without formats: " + port.id);
    return *best;
  }

  void resolve_topology() {
    for (const auto& dc : scenario.data_centers) {
      if (dc.site == scenario.disaster.affected_site &&
          dc.power_state == PowerState::Generator) {
        affected_dc = &dc;
        break;
      }
    }
    if (affected_dc == nullptr) {
      raise(ErrorKind::Precondition,
            "no generator-backed data center at the affected site");
    }
    lessee_op = affected_dc->operator_id;

    auto node_site = [&](const std::string& node_id) -> std::string {
      for (const auto& n : scenario.nodes) {
        if (n.id == node_id) return n.site;
      }
      return "";
    };
    for (const auto& ls : scenario.line_systems) {
      std::string s0 = node_site(ls.endpoints[0]);
      std::string s1 = node_site(ls.endpoints[1]);
      bool touches = s0 == scenario.disaster.affected_site ||
                     s1 == scenario.disaster.affected_site;
      bool leaves = s0 != scenario.disaster.affected_site ||
                    s1 != scenario.disaster.affected_site;
      if (touches && leaves && ls.operator_id != lessee_op) {
        line = &ls;
        break;
      }
    }
    if (line == nullptr) {
      raise(ErrorKind::Precondition,
            "no borrowable line system leaves the affected site");
    }
    grid = &scenario.grid(line->grid_id);
    for (const auto& dc : scenario.data_centers) {
      if (dc.site != scenario.disaster.affected_site) {
        dest_dc = &dc;
        break;
      }
    }
    if (dest_dc == nullptr) {
      raise(ErrorKind::Precondition, "no destination data center outside the disaster");
    }
    owner_op = line->operator_id;
  }

  void build_demands() {
    std::vector<const TransceiverPort*> tx_ports, rx_ports;
    for (const auto& p : scenario.transceivers) {
      if (p.owner_operator != owner_op) continue;
      if (p.node_id == line->endpoints[0]) tx_ports.push_back(&p);
      if (p.node_id == line->endpoints[1]) rx_ports.push_back(&p);
    }
    auto by_id = [](const TransceiverPort* a, const TransceiverPort* b) {
      return a->id < b->id;
    };
    std::sort(tx_ports.begin(), tx_ports.end(), by_id);
    std::sort(rx_ports.begin(), rx_ports.end(), by_id);

    std::map<std::string, std::vector<const TransceiverPort*>> tx_by_fmt, rx_by_fmt;
    for (const auto* p : tx_ports) tx_by_fmt[best_format(*p).id].push_back(p);
    for (const auto* p : rx_ports) rx_by_fmt[best_format(*p).id].push_back(p);

    for (const auto& [fmt_id, txs] : tx_by_fmt) {
      const auto it = rx_by_fmt.find(fmt_id);
      if (it == rx_by_fmt.end()) continue;
      const ModulationFormat& fmt = scenario.format(fmt_id);
      size_t pairs = std::min(txs.size(), it->second.size());
      for (size_t i = 0; i < pairs; ++i) {
        optimizer::Demand d;
        d.id = "d_" + fmt_id + "_" + std::to_string(i + 1);
        d.format_id = fmt_id;
        d.net_rate_gbps = fmt.net_rate_gbps;
        d.symbol_rate_gbd = fmt.symbol_rate_gbd;
        d.tx_port = txs[i]->id;
        d.rx_port = it->second[i]->id;
        demands.push_back(d);
      }
    }
    std::sort(demands.begin(), demands.end(),
              [](const optimizer::Demand& a, const optimizer::Demand& b) {
                if (a.net_rate_gbps != b.net_rate_gbps) {
                  return a.net_rate_gbps > b.net_rate_gbps;
                }
                return a.id < b.id;
              });
    if (demands.empty()) {
      raise(ErrorKind::Precondition, "no delegable transceiver pairs on " + line->id);
    }
  }

  int slots_needed() const {
    int total = 0;
    for (const auto& d : demands) {
      const ModulationFormat& fmt = scenario.format(d.format_id);
      total += std::max(1, static_cast<int>(std::ceil(
                               fmt.symbol_rate_gbd * 1e9 /
                                   ghz_to_hz(grid->slot_spacing_ghz) -
                               1e-9)));
    }
    return total;
  }

  // Pure derivations: topology, demands, plans, sessions tokens. No control
  // plane mutations; safe to re-run when reloading persisted state.
  void prepare() {
    resolve_topology();
    build_demands();
    leased_slots.clear();
    int needed = slots_needed();
    for (int slot = 1; slot + 1 < grid->slot_count && needed > 0; ++slot, --needed) {
      leased_slots.push_back(slot);
    }

    double launch = options.initial_fiber_launch_dbm - line->booster.gain_db;
    comb_plan = make_comb_plan(*grid, launch);
    measurement_plan = comb_plan;
    int probe_idx = measurement_plan.index_of_slot(options.dlm_probe_slot);
    if (probe_idx < 0) {
      raise(ErrorKind::Domain, "DLM probe slot is not part of the comb");
    }
    measurement_plan.channels[static_cast<size_t>(probe_idx)].role = ChannelRole::Probe;
    measurement_plan.channels[static_cast<size_t>(probe_idx)].symbol_rate_gbd =
        options.probe_symbol_rate_gbd;

    initial_config = qot::LineConfig{};
    for (const Edfa* a : line->amps()) {
      initial_config.amps.push_back({a->gain_db, a->tilt_db});
    }
    initial_config.launch_dbm.assign(comb_plan.channels.size(), launch);
  }

  std::string token_of(const std::string& operator_id) const {
    for (const auto& op : scenario.operators) {
      if (op.id == operator_id) return op.token;
    }
    raise(ErrorKind::Reference, "no token for operator " + operator_id);
  }

  void setup() {
    if (setup_done) return;
    prepare();

    plane = std::make_unique<control::ControlPlane>(scenario);
    lessee_session = plane->authenticate(token_of(lessee_op));
    owner_session = plane->authenticate(token_of(owner_op));

    std::vector<control::LeaseResource> resources;
    for (int slot : leased_slots) {
      resources.push_back(control::LeaseResource::spectrum_slot(line->id, slot));
    }
    for (const auto& d : demands) {
      resources.push_back(control::LeaseResource::port(d.tx_port));
      resources.push_back(control::LeaseResource::port(d.rx_port));
    }
    double dataset_gb = 0.0;
    for (const auto& ds : affected_dc->datasets) dataset_gb += ds.size_gb;
    resources.push_back(control::LeaseResource::compute(dest_dc->id, dataset_gb, 16.0));

    lease_id = plane->request_lease(lessee_session, resources,
                                    options.lease_duration_hours);
    plane->grant_lease(owner_session, lease_id);
    for (const auto& d : demands) {
      plane->delegate_port(owner_session, d.tx_port, lessee_op,
                           {"read-state", "configure", "read-telemetry"});
      plane->delegate_port(owner_session, d.rx_port, lessee_op,
                           {"read-state", "configure", "read-telemetry"});
    }
    setup_done = true;
  }

  double scheduled(const std::string& step) const {
    const WorkflowDurations& w = scenario.workflow_durations;
    if (step == "trx_characterization") return w.trx_characterization_min;
    if (step == "dlm_measure") return w.dlm_measure_min;
    if (step == "dlm_analyze") return w.dlm_analyze_min;
    if (step == "ols_measure") return w.ols_measure_min;
    if (step == "ols_analyze") return w.ols_analyze_min;
    if (step == "dlm_validate") return w.dlm_validate_min;
    if (step == "trx_configure") return w.trx_configure_min;
    if (step == "migrate") return w.migrate_min;
    raise(ErrorKind::Domain, "unknown workflow step " + step);
  }

  // Runs one ledger step: the body may return an actual duration that extends
  // the scheduled one. Failures inside the body mark the run infeasible at
  // this step; fuel is checked at the step boundary.
  bool run_step(const std::string& id, const std::function<double()>& body) {
    if (stopped) return false;
    double sched = scheduled(id);
    StepRecord record;
    record.id = id;
    record.started_min = clock_min;
    double actual = 0.0;
    bool failed = false;
    try {
      actual = body();
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Infeasible:
        case ErrorKind::LossOfSignal:
        case ErrorKind::ModelDomain:
        case ErrorKind::Precondition:
        case ErrorKind::RankDeficient:
          failed = true;
          outcome = Outcome::Infeasible;
          failing_step = id;
          failure_detail = e.what();
          break;
        default:
          throw;
      }
    }
    record.duration_min = std::max(sched, actual);
    record.ended_min = record.started_min + record.duration_min;
    clock_min = record.ended_min;
    steps.push_back(record);
    plane->advance_clock(clock_min);
    log_info("step " + id + " done at t=" + std::to_string(clock_min) + " min");
    if (failed) {
      stopped = true;
      return false;
    }
    if (fuel_exhausted_at(clock_min, scenario.disaster.fuel_hours)) {
      outcome = Outcome::DeadlineExceeded;
      failing_step = id;
      failure_detail = "generator fuel exhausted during " + id;
      stopped = true;
      return false;
    }
    return true;
  }

  // --- stages ---------------------------------------------------------------

  bool stage_characterize() {
    setup();
    bool ok = run_step("trx_characterization", [&] {
      for (const auto& d : demands) {
        for (const std::string& port_id : {d.tx_port, d.rx_port}) {
          if (trx.count(port_id)) continue;
          const TransceiverPort& port = scenario.port(port_id);
          const ModulationFormat& fmt = best_format(port);
          std::vector<double> attens;
          for (int a = 0; a <= 20; a += 2) attens.push_back(a);
          telemetry::VoaSweepRecord sweep = telemetry::simulate_voa_sweep(
              port, fmt, attens, 40.0, 0.0, options.voa_ber_log_sigma,
              RngStream::derive_seed(seed, "voa." + port_id));
          trx[port_id] = characterization::fit_transceiver_noise(sweep, fmt);
        }
      }
      return 0.0;
    });
    ok = ok && run_step("dlm_measure", [&] {
      profile_before = telemetry::simulate_dlm_capture(
          *line, *grid, initial_config, measurement_plan, options.dlm_probe_slot,
          options.dlm_spacing_km, options.dlm_sigma_db,
          RngStream::derive_seed(seed, "dlm.before"));
      return 0.0;
    });
    ok = ok && run_step("dlm_analyze", [&] {
      link = characterization::analyze_dlm_profile(profile_before,
                                                   options.detection_threshold_db);
      return 0.0;
    });
    characterized = ok;
    return ok;
  }

  qot::LineConfig probe_config(int probe_index) const {
    qot::LineConfig cfg;
    auto amps = line->amps();
    RngStream rng(seed, "ols.settings", static_cast<std::uint64_t>(probe_index));
    for (const Edfa* a : amps) {
      double g = a->gain_db, t = a->tilt_db;
      if (probe_index > 0) {
        g = std::clamp(g + rng.uniform(-1.0, 1.0), a->gain_range_db[0],
                       a->gain_range_db[1]);
        t += rng.uniform(-0.5, 0.5);
      }
      cfg.amps.push_back({g, t});
    }
    double launch = options.probe_fiber_launch_dbm - cfg.amps[0].gain_db;
    cfg.launch_dbm.assign(comb_plan.channels.size(), launch);
    return cfg;
  }

  bool stage_calibrate() {
    if (!characterized || !link) {
      raise(ErrorKind::Precondition, "calibration requires the characterization stage");
    }
    bool ok = run_step("ols_measure", [&] {
      std::vector<characterization::ProbeRecord> probes;
      for (int p = 0; p < options.probe_count; ++p) {
        characterization::ProbeRecord rec;
        rec.config = probe_config(p);
        rec.plan = comb_plan;
        rec.far_end = telemetry::simulate_osa_spectrum(
            *line, *grid, rec.config, comb_plan, line->endpoints[1],
            options.osa_sigma_db,
            RngStream::derive_seed(seed, "ols.osa", static_cast<std::uint64_t>(p)));
        rec.amp_readings = telemetry::read_amp_power_monitors(
            *line, *grid, rec.config, comb_plan, options.amp_monitor_sigma_db,
            RngStream::derive_seed(seed, "ols.amp", static_cast<std::uint64_t>(p)));
        probes.push_back(std::move(rec));
      }
      ols = characterization::calibrate_ols(probes, public_specs(*line, *grid));
      return 0.0;
    });
    calibrated = ok;
    return ok;
  }

  bool stage_optimize() {
    if (!calibrated || !ols) {
      raise(ErrorKind::Precondition, "optimization requires the calibration stage");
    }
    bool ok = run_step("ols_analyze", [&] {
      twin = characterization::assemble_line_model(*link, *ols, public_specs(*line, *grid));
      qot::PropagationResult before = qot::propagate_walk(
          qot::line_elements(*twin), *grid, initial_config, comb_plan);
      double flat_before = optimizer::gsnr_flatness_db(before.taps.back().gsnr);
      optimum = optimizer::optimize_line(*twin, *grid, comb_plan, initial_config);

      OptimizationSummary summary;
      summary.objective_db = optimum->objective_db;
      summary.iterations = optimum->iterations;
      summary.flatness_before_db = flat_before;
      summary.flatness_after_db = optimum->flatness_db;
      summary.min_gsnr_db = optimizer::min_gsnr_db(optimum->end_of_line);
      summary.launch_offset_db = optimum->launch_offset_db;
      summary.launch_tilt_db = optimum->launch_tilt_db;
      opt_summary = summary;

      figures.launch_power.clear();
      for (const auto& c : comb_plan.channels) {
        figures.launch_power.push_back(
            {c.slot_index, hz_to_thz(c.center_freq_hz(*grid)),
             optimum->launch_at(*grid, c.center_freq_hz(*grid))});
      }
      figures.accumulated_gsnr.clear();
      qot::PropagationResult after = qot::propagate_walk(
          qot::line_elements(*twin), *grid, optimum->config, comb_plan);
      for (size_t t = 0; t < after.taps.size(); ++t) {
        for (const auto& ch : after.taps[t].gsnr.channels) {
          figures.accumulated_gsnr.push_back(
              {ch.slot_index, grid->carrier_thz(ch.slot_index), static_cast<int>(t),
               after.taps[t].element_id, ch.gsnr_db, ch.snr_ase_db, ch.snr_nli_db});
        }
      }
      return 0.0;
    });
    ok = ok && run_step("dlm_validate", [&] {
      profile_after = telemetry::simulate_dlm_capture(
          *line, *grid, optimum->config, measurement_plan, options.dlm_probe_slot,
          options.dlm_spacing_km, options.dlm_sigma_db,
          RngStream::derive_seed(seed, "dlm.after"));
      characterization::ProfileDelta delta =
          characterization::compare_profiles(profile_before, profile_after);
      figures.dlm_position_km = profile_before.position_km;
      figures.dlm_before_dbm = profile_before.power_dbm;
      figures.dlm_after_dbm.clear();
      for (size_t i = 0; i < delta.delta_db.size(); ++i) {
        figures.dlm_after_dbm.push_back(profile_before.power_dbm[i] + delta.delta_db[i]);
      }
      return 0.0;
    });
    optimized = ok;
    return ok;
  }

  bool stage_provision() {
    if (!optimized || !optimum) {
      raise(ErrorKind::Precondition, "provisioning requires the optimization stage");
    }
    bool ok = run_step("trx_configure", [&] {
      std::set<int> usable(leased_slots.begin(), leased_slots.end());
      for (int s : {0, grid->slot_count - 1}) usable.erase(s);
      for (const auto& c : comb_plan.channels) {
        if (c.role == ChannelRole::Dummy && c.locked) usable.erase(c.slot_index);
      }
      std::map<std::string, characterization::TrxEstimate> rx_trx;
      for (const auto& d : demands) rx_trx[d.rx_port] = trx.at(d.rx_port);

      designs = optimizer::design_lightpaths(demands, optimum->end_of_line, rx_trx,
                                             options.margin_db, options.fec_limit,
                                             usable, scenario.formats, *grid, *optimum);

      // final plan: traffic channels displace the dummies they cover
      final_plan = ChannelPlan{};
      std::set<int> taken;
      for (const auto& d : designs) {
        for (int s = d.slot_index; s < d.slot_index + d.width_slots; ++s) taken.insert(s);
      }
      for (const auto& c : comb_plan.channels) {
        if (!taken.count(c.slot_index)) final_plan.channels.push_back(c);
      }
      for (const auto& d : designs) {
        Channel c;
        c.slot_index = d.slot_index;
        c.width_slots = d.width_slots;
        c.symbol_rate_gbd = scenario.format(d.format_id).symbol_rate_gbd;
        c.role = ChannelRole::Traffic;
        c.format_id = d.format_id;
        c.launch_power_dbm = d.launch_power_dbm;
        final_plan.channels.push_back(c);
      }
      std::sort(final_plan.channels.begin(), final_plan.channels.end(),
                [](const Channel& a, const Channel& b) {
                  return a.slot_index < b.slot_index;
                });

      final_config.amps = optimum->config.amps;
      final_config.launch_dbm.clear();
      for (const auto& c : final_plan.channels) {
        if (c.role == ChannelRole::Traffic) {
          final_config.launch_dbm.push_back(c.launch_power_dbm);
        } else {
          final_config.launch_dbm.push_back(
              optimum->launch_at(*grid, c.center_freq_hz(*grid)));
        }
      }

      // refine predictions on the calibrated twin with the final plan
      qot::PropagationResult twin_walk = qot::propagate_walk(
          qot::line_elements(*twin), *grid, final_config, final_plan);
      const qot::GsnrSpectrum& twin_end = twin_walk.taps.back().gsnr;
      for (auto& d : designs) {
        for (size_t i = 0; i < final_plan.channels.size(); ++i) {
          if (final_plan.channels[i].slot_index == d.slot_index &&
              final_plan.channels[i].role == ChannelRole::Traffic) {
            d.predicted_gsnr_db = qot::combine_with_transceiver(
                twin_end.channels[i].gsnr_db, trx.at(d.rx_port).snr_trx_db);
          }
        }
        if (d.predicted_gsnr_db < d.required_gsnr_db + d.margin_db) {
          raise(ErrorKind::Infeasible,
                "design " + d.demand_id + " fails the margin check after refinement");
        }
      }

      for (const auto& d : designs) {
        PortConfig cfg{d.slot_index, d.format_id, d.launch_power_dbm};
        plane->configure_port(lessee_session, d.tx_port, cfg);
        plane->configure_port(lessee_session, d.rx_port, cfg);
      }

      validations = validate_designs(designs, scenario, *line, *grid, final_config,
                                     final_plan, options.validate_sigma_db,
                                     RngStream::derive_seed(seed, "validate"));
      for (const auto& v : validations) {
        plane->record_port_measurement(lessee_session, v.design.rx_port,
                                       v.measured_gsnr_db);
        if (v.measured_gsnr_db < v.design.required_gsnr_db) {
          raise(ErrorKind::Infeasible,
                "lightpath " + v.design.demand_id + " measured below the FEC limit");
        }
      }

      telemetry::OsaSpectrum spectrum = telemetry::simulate_osa_spectrum(
          *line, *grid, final_config, final_plan, line->endpoints[1],
          options.osa_sigma_db, RngStream::derive_seed(seed, "spectrum.final"));
      figures.received_spectrum.clear();
      for (int s = 0; s < grid->slot_count; ++s) {
        std::string role = "measurement";
        const Channel* c = final_plan.at_slot(s);
        if (c != nullptr) {
          role = c->role == ChannelRole::Traffic ? scenario.format(c->format_id).id
                                                 : channel_role_name(c->role);
        }
        figures.received_spectrum.push_back(
            {s, grid->carrier_thz(s), spectrum.slot_power_dbm[static_cast<size_t>(s)],
             role});
      }
      return 0.0;
    });
    provisioned = ok;
    return ok;
  }

  bool stage_migrate() {
    if (!provisioned) {
      raise(ErrorKind::Precondition, "migration requires provisioned lightpaths");
    }
    bool ok = run_step("migrate", [&] {
      double capacity = 0.0;
      for (const auto& d : designs) capacity += scenario.format(d.format_id).net_rate_gbps;
      double dataset_gb = 0.0;
      for (const auto& ds : affected_dc->datasets) dataset_gb += ds.size_gb;
      migration = migrate_dataset(dataset_gb, capacity, options.migration_utilization,
                                  options.migration_setup_min);
      return migration->duration_min;
    });
    migrated = ok;
    return ok;
  }

  RecoveryReport make_report() const {
    RecoveryReport r;
    r.seed = seed;
    r.scenario_line_id = line ? line->id : "";
    r.outcome = outcome;
    r.failing_step = failing_step;
    r.failure_detail = failure_detail;
    r.steps = steps;
    r.total_duration_min = steps.empty() ? 0.0 : steps.back().ended_min;
    r.fuel_deadline_hours = scenario.disaster.fuel_hours;
    r.link_estimate = link;
    r.ols_estimate = ols;
    for (const auto& [id, t] : trx) r.trx_estimates.push_back(t);
    r.optimization = opt_summary;
    r.lightpaths = validations;
    r.migration = migration;
    r.lease_id = lease_id;
    r.figures = figures;
    return r;
  }
};

Workflow::Workflow(const Scenario& scenario, std::uint64_t seed,
                   const RecoveryOptions& options)
    : impl_(std::make_unique<Impl>()) {
  impl_->scenario = scenario;
  impl_->options = options;
  impl_->seed = seed;
}

Workflow::~Workflow() = default;

bool Workflow::stage_characterize() { return impl_->stage_characterize(); }
bool Workflow::stage_calibrate() { return impl_->stage_calibrate(); }
bool Workflow::stage_optimize() { return impl_->stage_optimize(); }
bool Workflow::stage_provision() { return impl_->stage_provision(); }
bool Workflow::stage_migrate() { return impl_->stage_migrate(); }

RecoveryReport Workflow::report() const { return impl_->make_report(); }

std::string Workflow::save_state() const {
  using nlohmann::json;
  const Impl& s = *impl_;
  json j;
  j["seed"] = s.seed;
  j["clock_min"] = s.clock_min;
  j["stopped"] = s.stopped;
  j["outcome"] = outcome_name(s.outcome);
  j["failing_step"] = s.failing_step;
  j["failure_detail"] = s.failure_detail;
  j["flags"] = {{"setup", s.setup_done},         {"characterized", s.characterized},
                {"calibrated", s.calibrated},    {"optimized", s.optimized},
                {"provisioned", s.provisioned},  {"migrated", s.migrated}};
  json steps = json::array();
  for (const auto& st : s.steps) steps.push_back(serial::step_to_json(st));
  j["steps"] = steps;
  json trx = json::array();
  for (const auto& [id, t] : s.trx) trx.push_back(serial::trx_to_json(t));
  j["trx_estimates"] = trx;
  if (s.link) j["link_estimate"] = serial::link_to_json(*s.link);
  if (s.ols) j["ols_estimate"] = serial::ols_to_json(*s.ols);
  if (s.optimum) j["optimization"] = serial::optimization_to_json(*s.optimum);
  if (s.opt_summary) {
    j["optimization_summary"] = {
        {"objective_db", s.opt_summary->objective_db},
        {"iterations", s.opt_summary->iterations},
        {"flatness_before_db", s.opt_summary->flatness_before_db},
        {"flatness_after_db", s.opt_summary->flatness_after_db},
        {"min_gsnr_db", s.opt_summary->min_gsnr_db},
        {"launch_offset_db", s.opt_summary->launch_offset_db},
        {"launch_tilt_db", s.opt_summary->launch_tilt_db}};
  }
  json designs = json::array();
  for (const auto& d : s.designs) designs.push_back(serial::design_to_json(d));
  j["designs"] = designs;
  json validations = json::array();
  for (const auto& v : s.validations) validations.push_back(serial::outcome_to_json(v));
  j["validations"] = validations;
  if (s.migration) j["migration"] = serial::migration_to_json(*s.migration);
  if (!s.profile_before.position_km.empty()) {
    j["profile_before"] = serial::profile_to_json(s.profile_before);
  }
  j["figures"] = serial::figures_to_json(s.figures);
  j["lease_id"] = s.lease_id;
  json audit = json::array();
  if (s.plane) {
    for (const auto& line : s.plane->audit_log()) audit.push_back(line);
  }
  j["audit_log"] = audit;
  return canonical_dump(j);
}

std::unique_ptr<Workflow> Workflow::load_state(const Scenario& scenario,
                                               const RecoveryOptions& options,
                                               const std::string& state_json) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(state_json);
  } catch (const json::exception& e) {
    raise(ErrorKind::Io, std::string("corrupt workflow state: ") + e.what());
  }
  auto wf = std::make_unique<Workflow>(scenario, j.at("seed").get<std::uint64_t>(),
                                       options);
  Impl& s = *wf->impl_;
  const json& flags = j.at("flags");
  if (flags.at("setup").get<bool>()) {
    s.prepare();
    std::vector<std::string> audit;
    for (const auto& line : j.at("audit_log")) audit.push_back(line.get<std::string>());
    s.plane = std::make_unique<control::ControlPlane>(scenario);
    s.plane->restore_from_audit(audit);
    s.lessee_session = s.plane->authenticate(s.token_of(s.lessee_op));
    s.owner_session = s.plane->authenticate(s.token_of(s.owner_op));
    s.setup_done = true;
  }
  s.clock_min = j.at("clock_min").get<double>();
  s.stopped = j.at("stopped").get<bool>();
  std::string oc = j.at("outcome").get<std::string>();
  s.outcome = oc == "succeeded" ? Outcome::Succeeded
              : oc == "deadline_exceeded" ? Outcome::DeadlineExceeded
                                          : Outcome::Infeasible;
  s.failing_step = j.at("failing_step").get<std::string>();
  s.failure_detail = j.at("failure_detail").get<std::string>();
  s.characterized = flags.at("characterized").get<bool>();
  s.calibrated = flags.at("calibrated").get<bool>();
  s.optimized = flags.at("optimized").get<bool>();
  s.provisioned = flags.at("provisioned").get<bool>();
  s.migrated = flags.at("migrated").get<bool>();
  for (const auto& st : j.at("steps")) s.steps.push_back(serial::step_from_json(st));
  for (const auto& t : j.at("trx_estimates")) {
    characterization::TrxEstimate e = serial::trx_from_json(t);
    s.trx[e.port_id] = e;
  }
  if (j.contains("link_estimate")) s.link = serial::link_from_json(j.at("link_estimate"));
  if (j.contains("ols_estimate")) s.ols = serial::ols_from_json(j.at("ols_estimate"));
  if (j.contains("optimization")) {
    s.optimum = serial::optimization_from_json(j.at("optimization"));
  }
  if (j.contains("optimization_summary")) {
    const json& os = j.at("optimization_summary");
    OptimizationSummary sum;
    sum.objective_db = os.at("objective_db").get<double>();
    sum.iterations = os.at("iterations").get<int>();
    sum.flatness_before_db = os.at("flatness_before_db").get<double>();
    sum.flatness_after_db = os.at("flatness_after_db").get<double>();
    sum.min_gsnr_db = os.at("min_gsnr_db").get<double>();
    sum.launch_offset_db = os.at("launch_offset_db").get<double>();
    sum.launch_tilt_db = os.at("launch_tilt_db").get<double>();
    s.opt_summary = sum;
  }
  for (const auto& d : j.at("designs")) s.designs.push_back(serial::design_from_json(d));
  for (const auto& v : j.at("validations")) {
    s.validations.push_back(serial::outcome_from_json(v));
  }
  if (j.contains("migration")) s.migration = serial::migration_from_json(j.at("migration"));
  if (j.contains("profile_before")) {
    s.profile_before = serial::profile_from_json(j.at("profile_before"));
  }
  s.figures = serial::figures_from_json(j.at("figures"));
  s.lease_id = j.at("lease_id").get<std::string>();
  if (s.link && s.ols) {
    s.twin = characterization::assemble_line_model(*s.link, *s.ols,
                                                   public_specs(*s.line, *s.grid));
  }
  return wf;
}

RecoveryReport run_recovery(const Scenario& scenario, std::uint64_t seed,
                            const RecoveryOptions& options) {
  Workflow wf(scenario, seed, options);
  bool ok = wf.stage_characterize();
  ok = ok && wf.stage_calibrate();
  ok = ok && wf.stage_optimize();
  ok = ok && wf.stage_provision();
  ok = ok && wf.stage_migrate();
  return wf.report();
}

}  // namespace optwin::orchestrator
