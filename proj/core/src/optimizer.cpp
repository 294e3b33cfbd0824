#include "optwin/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace optwin::optimizer {

double gsnr_flatness_db(const qot::GsnrSpectrum& spectrum) {
  if (spectrum.channels.empty()) return 0.0;
  double lo = spectrum.channels.front().gsnr_db, hi = lo;
  for (const auto& c : spectrum.channels) {
    lo = std::min(lo, c.gsnr_db);
    hi = std::max(hi, c.gsnr_db);
  }
  return hi - lo;
}

double min_gsnr_db(const qot::GsnrSpectrum& spectrum) {
  double lo = qot::kGsnrCapDb;
  for (const auto& c : spectrum.channels) lo = std::min(lo, c.gsnr_db);
  return lo;
}

double flatness_objective_db(const qot::GsnrSpectrum& spectrum, double flatness_weight) {
  return min_gsnr_db(spectrum) - flatness_weight * gsnr_flatness_db(spectrum);
}

namespace {

struct SearchSpace {
  // parameter vector: [launch_offset, launch_tilt, gain_0.., tilt_0..]
  std::vector<double> lo, hi;
};

struct Evaluation {
  double objective = -1e300;
  double total_gain = 0.0;
  bool feasible = false;
};

class LineProblem {
 public:
  LineProblem(const LineSystem& model, const SpectrumGrid& grid, const ChannelPlan& plan,
              const qot::LineConfig& initial, double flatness_weight)
      : model_(model),
        grid_(grid),
        plan_(plan),
        amps_(model.amps()),
        flatness_weight_(flatness_weight) {
    base_launch_.resize(plan.channels.size());
    for (size_t i = 0; i < plan.channels.size(); ++i) {
      base_launch_[i] = initial.launch_dbm[i];
    }
    initial_gains_.reserve(amps_.size());
    for (const auto& a : initial.amps) initial_gains_.push_back(a);
  }

  size_t dim() const { return 2 + 2 * amps_.size(); }

  SearchSpace space() const {
    SearchSpace s;
    s.lo.push_back(-kLaunchOffsetLimitDb);
    s.hi.push_back(kLaunchOffsetLimitDb);
    s.lo.push_back(-kLaunchTiltLimitDb);
    s.hi.push_back(kLaunchTiltLimitDb);
    for (const Edfa* a : amps_) {
      s.lo.push_back(a->gain_range_db[0]);
      s.hi.push_back(a->gain_range_db[1]);
    }
    for (size_t i = 0; i < amps_.size(); ++i) {
      s.lo.push_back(-kAmpTiltLimitDb);
      s.hi.push_back(kAmpTiltLimitDb);
    }
    return s;
  }

  std::vector<double> initial_point() const {
    std::vector<double> x(dim(), 0.0);
    for (size_t i = 0; i < amps_.size(); ++i) {
      x[2 + i] = initial_gains_[i].gain_db;
      x[2 + amps_.size() + i] = initial_gains_[i].tilt_db;
    }
    return x;
  }

  qot::LineConfig config_for(const std::vector<double>& x) const {
    qot::LineConfig cfg;
    for (size_t i = 0; i < amps_.size(); ++i) {
      cfg.amps.push_back({x[2 + i], x[2 + amps_.size() + i]});
    }
    cfg.launch_dbm.resize(plan_.channels.size());
    for (size_t i = 0; i < plan_.channels.size(); ++i) {
      double fn = grid_.normalized_freq(plan_.channels[i].center_freq_hz(grid_));
      cfg.launch_dbm[i] = base_launch_[i] + x[0] + x[1] * fn;
    }
    return cfg;
  }

  Evaluation evaluate(const std::vector<double>& x) const {
    Evaluation ev;
    qot::LineConfig cfg = config_for(x);
    // booster ceiling: reject instead of clipping so the search stays inside
    double total_out_w = 0.0;
    for (size_t i = 0; i < plan_.channels.size(); ++i) {
      double g = qot::amp_channel_gain_db(*amps_[0], cfg.amps[0], grid_,
                                          plan_.channels[i]);
      total_out_w += dbm_to_w(cfg.launch_dbm[i] + g);
    }
    if (total_out_w > 0.0 &&
        w_to_dbm(total_out_w) > amps_[0]->max_total_output_dbm) {
      return ev;
    }
    try {
      qot::PropagationResult walk =
          qot::propagate_walk(qot::line_elements(model_), grid_, cfg, plan_);
      ev.objective = flatness_objective_db(walk.taps.back().gsnr, flatness_weight_);
      ev.feasible = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::LossOfSignal) throw;
      return ev;
    }
    for (size_t i = 0; i < amps_.size(); ++i) ev.total_gain += x[2 + i];
    return ev;
  }

  const std::vector<const Edfa*>& amps() const { return amps_; }
  const std::vector<double>& base_launch() const { return base_launch_; }

 private:
  const LineSystem& model_;
  const SpectrumGrid& grid_;
  const ChannelPlan& plan_;
  std::vector<const Edfa*> amps_;
  double flatness_weight_;
  std::vector<double> base_launch_;
  std::vector<qot::AmpSetting> initial_gains_;
};

}  // namespace

OptimizationResult optimize_line(const LineSystem& model, const SpectrumGrid& grid,
                                 const ChannelPlan& plan, const qot::LineConfig& initial,
                                 const OptimizeOptions& options) {
  if (plan.channels.empty()) raise(ErrorKind::Domain, "optimize_line: empty channel plan");
  if (initial.amps.size() != model.amps().size() ||
      initial.launch_dbm.size() != plan.channels.size()) {
    raise(ErrorKind::Domain, "optimize_line: initial config does not match line/plan");
  }
  LineProblem problem(model, grid, plan, initial, options.flatness_weight);
  SearchSpace space = problem.space();
  for (size_t i = 0; i < problem.dim(); ++i) {
    if (space.lo[i] > space.hi[i]) {
      raise(ErrorKind::Infeasible, "empty search interval for parameter " +
                                       std::to_string(i));
    }
  }

  std::vector<double> x = problem.initial_point();
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], space.lo[i], space.hi[i]);
  Evaluation cur = problem.evaluate(x);
  if (!cur.feasible) {
    // nudge the launch offset down until the starting point is evaluable
    for (double off = -1.0; off >= space.lo[0] - 1e-9 && !cur.feasible; off -= 1.0) {
      x[0] = off;
      cur = problem.evaluate(x);
    }
  }
  if (!cur.feasible) {
    raise(ErrorKind::Infeasible, "no evaluable starting configuration for " + model.id);
  }

  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  int sweeps = 0;
  for (; sweeps < options.max_sweeps; ++sweeps) {
    double sweep_start = cur.objective;
    for (size_t p = 0; p < problem.dim(); ++p) {
      double a = space.lo[p], b = space.hi[p];
      if (b - a < 1e-9) continue;
      auto eval_at = [&](double v) {
        std::vector<double> y = x;
        y[p] = v;
        Evaluation ev = problem.evaluate(y);
        return ev.feasible ? -ev.objective : 1e300;  // minimize
      };
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      double f1 = eval_at(x1), f2 = eval_at(x2);
      while (b - a > 1e-3) {
        if (f1 > f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + phi * (b - a);
          f2 = eval_at(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - phi * (b - a);
          f1 = eval_at(x1);
        }
      }
      double candidate = 0.5 * (a + b);
      std::vector<double> y = x;
      y[p] = candidate;
      Evaluation ev = problem.evaluate(y);
      // accept strict improvements; on ties prefer the smaller total gain,
      // then the earlier (current) parameter vector
      bool accept = false;
      if (ev.feasible) {
        if (ev.objective > cur.objective + 1e-12) {
          accept = true;
        } else if (std::abs(ev.objective - cur.objective) <= 1e-12 &&
                   ev.total_gain < cur.total_gain - 1e-12) {
          accept = true;
        }
      }
      if (accept) {
        x = y;
        cur = ev;
      }
    }
    if (cur.objective - sweep_start < options.convergence_db) {
      ++sweeps;
      break;
    }
  }

  qot::LineConfig cfg = problem.config_for(x);
  qot::PropagationResult walk =
      qot::propagate_walk(qot::line_elements(model), grid, cfg, plan);

  OptimizationResult result;
  result.config = cfg;
  result.end_of_line = walk.taps.back().gsnr;
  result.objective_db = cur.objective;
  result.iterations = sweeps;
  result.flatness_db = gsnr_flatness_db(result.end_of_line);
  result.base_launch_dbm = problem.base_launch().empty() ? 0.0 : problem.base_launch()[0];
  result.launch_offset_db = x[0];
  result.launch_tilt_db = x[1];
  return result;
}

std::vector<LightpathDesign> design_lightpaths(
    std::vector<Demand> demands, const qot::GsnrSpectrum& end_of_line,
    const std::map<std::string, characterization::TrxEstimate>& trx_by_port,
    double margin_db, double fec_limit, const std::set<int>& usable_slots,
    const std::vector<ModulationFormat>& formats, const SpectrumGrid& grid,
    const OptimizationResult& optimum) {
  std::sort(demands.begin(), demands.end(), [](const Demand& a, const Demand& b) {
    if (a.net_rate_gbps != b.net_rate_gbps) return a.net_rate_gbps > b.net_rate_gbps;
    return a.id < b.id;
  });

  std::map<int, const qot::ChannelGsnr*> by_slot;
  for (const auto& c : end_of_line.channels) by_slot[c.slot_index] = &c;

  auto format_of = [&](const std::string& id) -> const ModulationFormat& {
    for (const auto& f : formats) {
      if (f.id == id) return f;
    }
    raise(ErrorKind::NotFound, "unknown modulation format: " + id);
  };

  std::set<int> free_slots = usable_slots;
  std::vector<LightpathDesign> designs;
  for (const auto& d : demands) {
    const ModulationFormat& fmt = format_of(d.format_id);
    int width = static_cast<int>(
        std::ceil(fmt.symbol_rate_gbd * 1e9 / ghz_to_hz(grid.slot_spacing_ghz) - 1e-9));
    width = std::max(width, 1);
    auto trx_it = trx_by_port.find(d.rx_port);
    if (trx_it == trx_by_port.end()) {
      raise(ErrorKind::Precondition,
            "no transceiver characterization for port " + d.rx_port);
    }
    double required = qot::required_gsnr_db(fmt, fec_limit);

    int chosen = -1;
    double best_shortfall = 1e300;
    for (int slot : free_slots) {
      bool block_free = true;
      for (int s = slot; s < slot + width; ++s) block_free &= free_slots.count(s) > 0;
      if (!block_free || slot + width > grid.slot_count) continue;
      auto it = by_slot.find(slot);
      if (it == by_slot.end()) continue;
      qot::ChannelGsnr at_rate =
          qot::gsnr_at_bandwidth(*it->second, fmt.symbol_rate_gbd * 1e9);
      double combined =
          qot::combine_with_transceiver(at_rate.gsnr_db, trx_it->second.snr_trx_db);
      double shortfall = required + margin_db - combined;
      if (shortfall <= 0.0) {
        chosen = slot;
        break;  // slots iterate in ascending order
      }
      best_shortfall = std::min(best_shortfall, shortfall);
    }
    if (chosen < 0) {
      std::string detail;
      if (best_shortfall > 1e299) {
        detail = "no usable slot block";
      } else {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "best shortfall %.2f dB", best_shortfall);
        detail = buf;
      }
      raise(ErrorKind::Infeasible,
            "no feasible slot for demand " + d.id + " (" + d.format_id + "): " + detail);
    }

    LightpathDesign design;
    design.demand_id = d.id;
    design.tx_port = d.tx_port;
    design.rx_port = d.rx_port;
    design.slot_index = chosen;
    design.width_slots = width;
    design.format_id = d.format_id;
    Channel ch;
    ch.slot_index = chosen;
    ch.width_slots = width;
    design.launch_power_dbm = optimum.launch_at(grid, ch.center_freq_hz(grid));
    qot::ChannelGsnr at_rate =
        qot::gsnr_at_bandwidth(*by_slot[chosen], fmt.symbol_rate_gbd * 1e9);
    design.predicted_gsnr_db =
        qot::combine_with_transceiver(at_rate.gsnr_db, trx_it->second.snr_trx_db);
    design.required_gsnr_db = required;
    design.margin_db = margin_db;
    for (int s = chosen; s < chosen + width; ++s) free_slots.erase(s);
    designs.push_back(design);
  }
  return designs;
}

}  // namespace optwin::optimizer
