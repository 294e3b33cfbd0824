#include "optwin/characterization.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "optwin/qot.hpp"

namespace optwin::characterization {

namespace {

struct LineFit {
  double intercept = 0.0;  // value at x = 0
  double slope = 0.0;
  double x_mean = 0.0;
  double sxx = 0.0;
  int n = 0;

  double at(double x) const { return intercept + slope * x; }

  // variance of the fitted value at x for unit noise variance
  double value_var(double x) const {
    if (n <= 0) return 1e30;
    double v = 1.0 / n;
    if (sxx > 0.0) v += (x - x_mean) * (x - x_mean) / sxx;
    return v;
  }
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys,
                 size_t begin, size_t end) {
  LineFit f;
  f.n = static_cast<int>(end - begin);
  if (f.n <= 0) return f;
  double mx = 0.0, my = 0.0;
  for (size_t i = begin; i < end; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= f.n;
  my /= f.n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = begin; i < end; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  f.x_mean = mx;
  f.sxx = sxx;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  return f;
}

// Common-slope fit across segments of one span (segments differ only by the
// lumped-loss offsets): returns slope and per-segment intercepts.
struct SpanFit {
  double slope = 0.0;
  std::vector<double> intercepts;  // aligned with segments
};

SpanFit fit_span(const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::vector<std::pair<size_t, size_t>>& segments) {
  SpanFit fit;
  double sxx = 0.0, sxy = 0.0;
  std::vector<double> mx(segments.size()), my(segments.size());
  for (size_t k = 0; k < segments.size(); ++k) {
    auto [b, e] = segments[k];
    double n = static_cast<double>(e - b);
    double tx = 0.0, ty = 0.0;
    for (size_t i = b; i < e; ++i) {
      tx += xs[i];
      ty += ys[i];
    }
    mx[k] = tx / n;
    my[k] = ty / n;
    for (size_t i = b; i < e; ++i) {
      sxx += (xs[i] - mx[k]) * (xs[i] - mx[k]);
      sxy += (xs[i] - mx[k]) * (ys[i] - my[k]);
    }
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  for (size_t k = 0; k < segments.size(); ++k) {
    fit.intercepts.push_back(my[k] - fit.slope * mx[k]);
  }
  return fit;
}

struct DetectedEvent {
  size_t gap = 0;  // event lies between sample `gap` and `gap + 1`
  double position_km = 0.0;
  double step_db = 0.0;  // signed, from the detection statistic
};

}  // namespace

LinkEstimate analyze_dlm_profile(const telemetry::PowerProfile& profile,
                                 double detection_threshold_db) {
  const std::vector<double>& xs = profile.position_km;
  const std::vector<double>& ys = profile.power_dbm;
  const size_t n = xs.size();
  if (n < 100) {
    raise(ErrorKind::Precondition,
          "profile too short: " + std::to_string(n) + " samples, need >= 100");
  }
  if (detection_threshold_db < 3.0 * profile.noise_sigma_db - 1e-9) {
    raise(ErrorKind::Precondition,
          "detection threshold " + std::to_string(detection_threshold_db) +
              " dB below 3x noise sigma; would hallucinate events");
  }
  const double sigma = profile.noise_sigma_db;
  const size_t window =
      std::max<size_t>(3, static_cast<size_t>(std::lround(kDetectorWindowKm /
                                                          profile.spacing_km)));

  // Matching pursuit over step candidates: repeatedly take the strongest gap
  // statistic, with fit windows truncated at already-accepted events.
  std::vector<DetectedEvent> events;
  auto boundaries = [&]() {
    std::vector<size_t> b;
    b.push_back(0);
    for (const auto& e : events) b.push_back(e.gap + 1);  // first post-step sample
    b.push_back(n);
    std::sort(b.begin(), b.end());
    return b;
  };

  for (int pass = 0; pass < 64; ++pass) {
    std::vector<size_t> bounds = boundaries();
    double best_abs = 0.0;
    DetectedEvent best;
    bool found = false;
    for (size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
      size_t lo = bounds[seg], hi = bounds[seg + 1];
      // candidate gaps run strictly inside an existing segment
      for (size_t gap = lo + 3; gap + 3 <= hi; ++gap) {
        size_t lbegin = std::max(lo, gap >= window ? gap - window : size_t{0});
        size_t rend = std::min(hi, gap + window);
        if (gap - lbegin < 3 || rend - gap < 3) continue;
        double x_event = xs[gap];
        bool near_existing = false;
        for (const auto& e : events) {
          if (std::abs(e.position_km - x_event) < kEventMergeKm) near_existing = true;
        }
        if (near_existing) continue;
        LineFit left = fit_line(xs, ys, lbegin, gap);
        LineFit right = fit_line(xs, ys, gap, rend);
        double step = right.at(x_event) - left.at(x_event);
        double var = sigma * sigma * (left.value_var(x_event) + right.value_var(x_event));
        double threshold = std::max(detection_threshold_db, 5.0 * std::sqrt(var));
        if (std::abs(step) > threshold && std::abs(step) > best_abs) {
          best_abs = std::abs(step);
          best = {gap - 1, x_event, step};
          found = true;
        }
      }
    }
    if (!found) break;
    events.push_back(best);
    std::sort(events.begin(), events.end(),
              [](const DetectedEvent& a, const DetectedEvent& b) {
                return a.position_km < b.position_km;
              });
  }

  // Final piecewise fit: spans between upward (amplifier) events, common
  // slope per span across lumped-loss sub-segments.
  LinkEstimate est;
  est.total_length_km = xs.back();
  est.launch_power_dbm = ys.front();

  std::vector<size_t> bounds = boundaries();
  std::vector<bool> is_amp(events.size());
  for (size_t i = 0; i < events.size(); ++i) is_amp[i] = events[i].step_db > 0.0;

  // group sample ranges into spans
  struct SpanGroup {
    std::vector<std::pair<size_t, size_t>> segments;
    std::vector<size_t> loss_event_idx;  // events interior to this span
  };
  std::vector<SpanGroup> groups;
  SpanGroup current;
  for (size_t i = 0; i <= events.size(); ++i) {
    size_t seg_begin = bounds[i];
    size_t seg_end = bounds[i + 1];
    current.segments.push_back({seg_begin, seg_end});
    if (i < events.size()) {
      if (is_amp[i]) {
        groups.push_back(current);
        current = SpanGroup{};
      } else {
        current.loss_event_idx.push_back(i);
      }
    }
  }
  groups.push_back(current);

  std::vector<SpanFit> span_fits;
  for (const auto& g : groups) span_fits.push_back(fit_span(xs, ys, g.segments));

  size_t event_cursor = 0;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    est.span_attenuation_db_per_km.push_back(-span_fits[gi].slope);
    for (size_t li = 0; li < groups[gi].loss_event_idx.size(); ++li) {
      const DetectedEvent& e = events[groups[gi].loss_event_idx[li]];
      double drop = span_fits[gi].intercepts[li] - span_fits[gi].intercepts[li + 1];
      est.loss_events.push_back({e.position_km, drop});
    }
    event_cursor += groups[gi].loss_event_idx.size();
    if (gi + 1 < groups.size()) {
      const DetectedEvent& amp_event = events[event_cursor];
      ++event_cursor;
      double left_val = span_fits[gi].intercepts.back() +
                        span_fits[gi].slope * amp_event.position_km;
      double right_val = span_fits[gi + 1].intercepts.front() +
                         span_fits[gi + 1].slope * amp_event.position_km;
      est.span_boundaries_km.push_back(amp_event.position_km);
      est.amp_step_db.push_back(right_val - left_val);
    }
  }

  // residual against the fitted piecewise model
  double ss = 0.0;
  size_t count = 0;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    for (size_t si = 0; si < groups[gi].segments.size(); ++si) {
      auto [b, e] = groups[gi].segments[si];
      for (size_t i = b; i < e; ++i) {
        double model = span_fits[gi].intercepts[si] + span_fits[gi].slope * xs[i];
        ss += (ys[i] - model) * (ys[i] - model);
        ++count;
      }
    }
  }
  est.residual_db_rms = count ? std::sqrt(ss / count) : 0.0;
  return est;
}

// ---------------------------------------------------------------------------
// OLS calibration
// ---------------------------------------------------------------------------

OlsEstimate calibrate_ols(const std::vector<ProbeRecord>& probes,
                          const PublicLineSpecs& specs) {
  const int amp_count = specs.ila_count + 2;
  const int span_count = specs.ila_count + 1;
  if (static_cast<int>(probes.size()) < amp_count + 2) {
    raise(ErrorKind::Precondition,
          "need at least " + std::to_string(amp_count + 2) + " probes for " +
              std::to_string(amp_count) + " amplifiers, got " +
              std::to_string(probes.size()));
  }
  const SpectrumGrid& grid = specs.grid;
  for (const auto& p : probes) {
    if (static_cast<int>(p.amp_readings.size()) != amp_count ||
        static_cast<int>(p.config.amps.size()) != amp_count) {
      raise(ErrorKind::Precondition, "probe record does not match the amplifier count");
    }
    if (static_cast<int>(p.far_end.slot_power_dbm.size()) != grid.slot_count ||
        static_cast<int>(p.near_end.slot_power_dbm.size()) != grid.slot_count) {
      raise(ErrorKind::Precondition, "probe spectrum does not match the grid");
    }
  }

  // Stage 1: span losses bracketed by the built-in monitors (amp k output to
  // amp k+1 input covers span k).
  std::vector<double> span_loss_db(static_cast<size_t>(span_count), 0.0);
  for (int j = 0; j < span_count; ++j) {
    double acc = 0.0;
    for (const auto& p : probes) {
      acc += p.amp_readings[static_cast<size_t>(j)].output_dbm -
             p.amp_readings[static_cast<size_t>(j + 1)].input_dbm;
    }
    span_loss_db[static_cast<size_t>(j)] = acc / static_cast<double>(probes.size());
  }
  double total_loss = 0.0;
  for (double l : span_loss_db) total_loss += l;

  // Stage 2: provisional aggregate ripple from the loaded probes. Only the
  // sum over amplifiers is observable from endpoint spectra, so it is split
  // uniformly; slots that carry no signal on any probe stay at zero.
  auto estimate_ripple = [&](const std::vector<double>* floor_psd_by_slot,
                             const Eigen::VectorXd* nf_lin) {
    std::vector<double> aggregate(static_cast<size_t>(grid.slot_count), 0.0);
    std::vector<int> samples(static_cast<size_t>(grid.slot_count), 0);
    for (const auto& p : probes) {
      for (size_t ci = 0; ci < p.plan.channels.size(); ++ci) {
        const Channel& c = p.plan.channels[ci];
        double fnorm = grid.normalized_freq(c.center_freq_hz(grid));
        double gains = 0.0;
        for (int k = 0; k < amp_count; ++k) {
          const auto& set = p.config.amps[static_cast<size_t>(k)];
          gains += set.gain_db + set.tilt_db * fnorm;
        }
        double predicted = p.config.launch_dbm[ci] + gains - total_loss -
                           10.0 * std::log10(static_cast<double>(c.width_slots));
        // skip slots where the ASE floor would bias the signal estimate and
        // no floor model is available yet
        if (floor_psd_by_slot == nullptr && predicted < -20.0) continue;
        for (int s = c.slot_index; s <= c.last_slot(); ++s) {
          double measured_w =
              dbm_to_w(p.far_end.slot_power_dbm[static_cast<size_t>(s)]);
          if (floor_psd_by_slot != nullptr && nf_lin != nullptr) {
            measured_w -= (*floor_psd_by_slot)[static_cast<size_t>(s)];
          }
          if (measured_w <= 0.0) continue;
          aggregate[static_cast<size_t>(s)] += w_to_dbm(measured_w) - predicted;
          samples[static_cast<size_t>(s)] += 1;
        }
      }
    }
    for (int s = 0; s < grid.slot_count; ++s) {
      auto idx = static_cast<size_t>(s);
      if (samples[idx] > 0) aggregate[idx] /= samples[idx];
    }
    return aggregate;
  };
  std::vector<double> aggregate_ripple = estimate_ripple(nullptr, nullptr);
  std::vector<double> per_amp_ripple(static_cast<size_t>(grid.slot_count), 0.0);
  for (int s = 0; s < grid.slot_count; ++s) {
    per_amp_ripple[static_cast<size_t>(s)] =
        aggregate_ripple[static_cast<size_t>(s)] / amp_count;
  }

  // per-slot gain of amp k in probe p, ripple included
  auto slot_gain_db = [&](const ProbeRecord& p, int k, int s) {
    const auto& set = p.config.amps[static_cast<size_t>(k)];
    return set.gain_db + set.tilt_db * grid.normalized_freq(grid.carrier_hz(s)) +
           per_amp_ripple[static_cast<size_t>(s)];
  };
  // linear transfer of the path from amp j output to amp k output at slot s
  auto transfer_lin = [&](const ProbeRecord& p, int j, int k, int s) {
    double t = 1.0;
    for (int m = j + 1; m <= k; ++m) {
      t *= db_to_linear(-span_loss_db[static_cast<size_t>(m - 1)]) *
           db_to_linear(slot_gain_db(p, m, s));
    }
    return t;
  };

  // Stage 3: noise figures. Three row families, all linear in NF and scaled
  // by the measurement so residuals are relative:
  //  - transmit-side floor at the guard slots (booster alone),
  //  - receive-side floor at the guard slots (the whole chain),
  //  - built-in meter totals wherever ASE is a significant share, which is
  //    what keeps the inner amplifiers from going collinear.
  std::vector<int> floor_slots = {specs.measurement_slots[0], specs.measurement_slots[1]};
  const int max_rows = static_cast<int>(probes.size()) *
                       (2 * static_cast<int>(floor_slots.size()) + 2 * amp_count);
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(max_rows, amp_count);
  Eigen::VectorXd target(max_rows);
  int row = 0;
  for (const auto& p : probes) {
    for (int s : floor_slots) {
      {
        double measured = dbm_to_w(p.near_end.slot_power_dbm[static_cast<size_t>(s)]);
        double weight = 1.0 / std::max(measured, 1e-30);
        double g_0 = db_to_linear(slot_gain_db(p, 0, s));
        design(row, 0) = weight * kPlanckJs * grid.carrier_hz(s) * (g_0 - 1.0) *
                         qot::kRefBandwidthHz;
        target(row) = weight * measured;
        ++row;
      }
      double measured = dbm_to_w(p.far_end.slot_power_dbm[static_cast<size_t>(s)]);
      double weight = 1.0 / std::max(measured, 1e-30);
      for (int k = 0; k < amp_count; ++k) {
        double g_k = db_to_linear(slot_gain_db(p, k, s));
        design(row, k) = weight * kPlanckJs * grid.carrier_hz(s) * (g_k - 1.0) *
                         transfer_lin(p, k, amp_count - 1, s) * qot::kRefBandwidthHz;
      }
      target(row) = weight * measured;
      ++row;
    }
    for (int k = 0; k < amp_count; ++k) {
      for (int side = 0; side < 2; ++side) {
        bool at_input = side == 1;
        if (at_input && k + 1 >= amp_count) continue;
        double span_t =
            at_input ? db_to_linear(-span_loss_db[static_cast<size_t>(k)]) : 1.0;
        double signal_w = 0.0;
        for (size_t ci = 0; ci < p.plan.channels.size(); ++ci) {
          const Channel& c = p.plan.channels[ci];
          double fnorm = grid.normalized_freq(c.center_freq_hz(grid));
          double level = p.config.launch_dbm[ci];
          for (int j = 0; j <= k; ++j) {
            const auto& set = p.config.amps[static_cast<size_t>(j)];
            level += set.gain_db + set.tilt_db * fnorm;
            if (j < k) level -= span_loss_db[static_cast<size_t>(j)];
          }
          signal_w += dbm_to_w(level) * span_t;
        }
        double measured_w =
            at_input
                ? dbm_to_w(p.amp_readings[static_cast<size_t>(k + 1)].input_dbm)
                : dbm_to_w(p.amp_readings[static_cast<size_t>(k)].output_dbm);
        double excess_w = measured_w - signal_w;
        // keep only readings where the ASE share is large enough to survive
        // the meter noise; signal-dominated rows would inject garbage
        if (excess_w <= 0.15 * measured_w) continue;
        double weight = 1.0 / measured_w;
        for (int j = 0; j <= k; ++j) {
          double coeff = 0.0;
          for (int s = 0; s < grid.slot_count; ++s) {
            double g_j = db_to_linear(slot_gain_db(p, j, s));
            coeff += kPlanckJs * grid.carrier_hz(s) * (g_j - 1.0) *
                     transfer_lin(p, j, k, s) * span_t *
                     ghz_to_hz(grid.slot_spacing_ghz);
          }
          design(row, j) = weight * coeff;
        }
        target(row) = weight * excess_w;
        ++row;
      }
    }
  }
  design.conservativeResize(row, amp_count);
  target.conservativeResize(row);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-8);
  if (qr.rank() < amp_count) {
    raise(ErrorKind::RankDeficient,
          "probe settings are rank deficient: rank " + std::to_string(qr.rank()) +
              " for " + std::to_string(amp_count) + " amplifiers");
  }
  Eigen::VectorXd nf_lin = qr.solve(target);

  OlsEstimate est;
  est.probe_count = static_cast<int>(probes.size());
  for (int k = 0; k < amp_count; ++k) {
    double v = nf_lin(k);
    if (!(v > 0.0)) {
      raise(ErrorKind::ModelDomain, "non-physical noise figure solution for amplifier " +
                                        std::to_string(k));
    }
    est.noise_figure_db.push_back(std::clamp(linear_to_db(v), 3.0, 12.0));
  }

  double ss = 0.0;
  for (int r = 0; r < row; ++r) {
    double predicted = design.row(r).dot(nf_lin);
    // rows are pre-scaled by the measurement, so residuals are relative
    double diff = linear_to_db(std::max(predicted, 1e-12) /
                               std::max(target(r), 1e-12));
    ss += diff * diff;
  }
  est.residual_db_rms = row > 0 ? std::sqrt(ss / row) : 0.0;

  // Stage 4: final ripple with the fitted floor subtracted, so low-launch
  // probes contribute without bias.
  std::vector<double> floor_psd(static_cast<size_t>(grid.slot_count), 0.0);
  {
    // floor per slot averaged over probes (the subtraction only needs to be
    // approximate: signal slots sit well above it)
    for (int s = 0; s < grid.slot_count; ++s) {
      double acc = 0.0;
      for (const auto& p : probes) {
        double f = 0.0;
        for (int k = 0; k < amp_count; ++k) {
          double g_k = db_to_linear(slot_gain_db(p, k, s));
          f += nf_lin(k) * kPlanckJs * grid.carrier_hz(s) * (g_k - 1.0) *
               transfer_lin(p, k, amp_count - 1, s);
        }
        acc += f;
      }
      floor_psd[static_cast<size_t>(s)] =
          acc / static_cast<double>(probes.size()) * qot::kRefBandwidthHz;
    }
  }
  std::vector<double> refined = estimate_ripple(&floor_psd, &nf_lin);
  std::vector<double> per_amp(static_cast<size_t>(grid.slot_count), 0.0);
  for (int s = 0; s < grid.slot_count; ++s) {
    per_amp[static_cast<size_t>(s)] = refined[static_cast<size_t>(s)] / amp_count;
  }
  double mean = 0.0;
  for (double v : per_amp) mean += v;
  mean /= static_cast<double>(per_amp.size());
  for (double& v : per_amp) v -= mean;
  est.ripple_db.assign(static_cast<size_t>(amp_count), per_amp);
  return est;
}

// ---------------------------------------------------------------------------
// Transceiver noise fit
// ---------------------------------------------------------------------------

namespace {

double sweep_loss(const telemetry::VoaSweepRecord& sweep, const ModulationFormat& format,
                  const std::vector<const telemetry::VoaPoint*>& points, double snr0,
                  double knee) {
  double ss = 0.0;
  for (const auto* pt : points) {
    double snr_trx = telemetry::receiver_snr_trx_db(snr0, sweep.input_power_dbm,
                                                    pt->attenuation_db, knee);
    double eff = qot::combine_with_transceiver(sweep.reference_snr_db, snr_trx);
    double model = qot::ber_from_gsnr(format, eff);
    double d = std::log10(std::max(model, 1e-30)) - std::log10(std::max(pt->ber, 1e-30));
    ss += d * d;
  }
  return ss;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 > f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TrxEstimate fit_transceiver_noise(const telemetry::VoaSweepRecord& sweep,
                                  const ModulationFormat& format) {
  for (size_t i = 1; i < sweep.points.size(); ++i) {
    if (sweep.points[i].attenuation_db <= sweep.points[i - 1].attenuation_db) {
      raise(ErrorKind::Precondition, "VOA sweep attenuations are not increasing");
    }
  }
  std::vector<const telemetry::VoaPoint*> usable;
  for (const auto& p : sweep.points) {
    if (!p.saturated) usable.push_back(&p);
  }
  if (usable.empty()) raise(ErrorKind::Precondition, "all sweep points saturated");
  if (usable.size() < 5) {
    raise(ErrorKind::Precondition, "need >= 5 non-saturated sweep points, got " +
                                       std::to_string(usable.size()));
  }

  double a_min = usable.front()->attenuation_db;
  double a_max = usable.back()->attenuation_db;
  double knee_lo = sweep.input_power_dbm - a_max - 5.0;
  double knee_hi = sweep.input_power_dbm - a_min + 5.0;

  double best_snr = 20.0, best_knee = 0.5 * (knee_lo + knee_hi);
  double best = 1e300;
  for (double snr = 8.0; snr <= 36.0 + 1e-9; snr += 0.5) {
    for (double knee = knee_lo; knee <= knee_hi + 1e-9; knee += 0.5) {
      double v = sweep_loss(sweep, format, usable, snr, knee);
      if (v < best) {
        best = v;
        best_snr = snr;
        best_knee = knee;
      }
    }
  }
  for (int round = 0; round < 6; ++round) {
    best_snr = golden_min(
        [&](double s) { return sweep_loss(sweep, format, usable, s, best_knee); },
        best_snr - 0.75, best_snr + 0.75, 0.002);
    best_knee = golden_min(
        [&](double k) { return sweep_loss(sweep, format, usable, best_snr, k); },
        std::max(knee_lo, best_knee - 0.75), std::min(knee_hi, best_knee + 0.75), 0.002);
  }

  TrxEstimate est;
  est.port_id = sweep.port_id;
  est.snr_trx_db = best_snr;
  est.knee_dbm = best_knee;
  est.residual_log10_ber =
      std::sqrt(sweep_loss(sweep, format, usable, best_snr, best_knee) / usable.size());
  return est;
}

// ---------------------------------------------------------------------------
// Profile comparison and twin assembly
// ---------------------------------------------------------------------------

ProfileDelta compare_profiles(const telemetry::PowerProfile& before,
                              const telemetry::PowerProfile& after) {
  if (before.slot_index != after.slot_index) {
    raise(ErrorKind::Precondition, "profiles taken on different channels");
  }
  if (before.position_km.empty() || after.position_km.empty() ||
      std::abs(before.position_km.back() - after.position_km.back()) > 1e-6) {
    raise(ErrorKind::Precondition, "profiles cover different total lengths");
  }

  ProfileDelta delta;
  size_t j = 0;
  for (size_t i = 0; i < before.position_km.size(); ++i) {
    double x = before.position_km[i];
    while (j + 1 < after.position_km.size() && after.position_km[j + 1] <= x) ++j;
    double y;
    if (j + 1 >= after.position_km.size()) {
      y = after.power_dbm.back();
    } else {
      double x0 = after.position_km[j], x1 = after.position_km[j + 1];
      double t = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      y = after.power_dbm[j] * (1.0 - t) + after.power_dbm[j + 1] * t;
    }
    delta.position_km.push_back(x);
    delta.delta_db.push_back(y - before.power_dbm[i]);
  }
  double sum = 0.0;
  for (double d : delta.delta_db) {
    delta.max_abs_db = std::max(delta.max_abs_db, std::abs(d));
    sum += d;
  }
  delta.mean_db = delta.delta_db.empty() ? 0.0 : sum / delta.delta_db.size();
  return delta;
}

LineSystem assemble_line_model(const LinkEstimate& link, const OlsEstimate& ols,
                               const PublicLineSpecs& specs) {
  const int span_count = static_cast<int>(link.span_boundaries_km.size()) + 1;
  if (span_count != specs.ila_count + 1) {
    raise(ErrorKind::ModelDomain,
          "profile analysis found " + std::to_string(span_count - 1) +
              " in-line amplifiers but the inventory lists " +
              std::to_string(specs.ila_count));
  }
  if (static_cast<int>(ols.noise_figure_db.size()) != specs.ila_count + 2) {
    raise(ErrorKind::ModelDomain, "calibration amp count does not match inventory");
  }

  LineSystem twin;
  twin.id = specs.line_id + "_twin";
  twin.operator_id = "estimated";
  twin.endpoints = {"twin_tx", "twin_rx"};
  twin.grid_id = specs.grid.id;

  std::vector<double> starts = {0.0};
  for (double b : link.span_boundaries_km) starts.push_back(b);
  starts.push_back(link.total_length_km);
  for (int i = 0; i < span_count; ++i) {
    FiberSpan span;
    span.id = specs.line_id + "_twin_span" + std::to_string(i);
    span.length_km = starts[static_cast<size_t>(i + 1)] - starts[static_cast<size_t>(i)];
    span.attenuation_db_per_km = link.span_attenuation_db_per_km[static_cast<size_t>(i)];
    span.dispersion_beta2_ps2_km = specs.span_beta2_ps2_km[static_cast<size_t>(i)];
    span.nonlinear_gamma_per_w_km = specs.span_gamma_per_w_km[static_cast<size_t>(i)];
    for (const auto& e : link.loss_events) {
      if (e.position_km > starts[static_cast<size_t>(i)] &&
          e.position_km <= starts[static_cast<size_t>(i + 1)]) {
        span.lumped_losses.push_back(
            {e.position_km - starts[static_cast<size_t>(i)], e.magnitude_db});
      }
    }
    twin.spans.push_back(span);
  }

  auto make_amp = [&](int k, const std::string& name) {
    Edfa e;
    e.id = specs.line_id + "_twin_" + name;
    e.gain_db = 0.5 * (specs.amp_gain_range_db[static_cast<size_t>(k)][0] +
                       specs.amp_gain_range_db[static_cast<size_t>(k)][1]);
    e.tilt_db = 0.0;
    e.noise_figure_db = ols.noise_figure_db[static_cast<size_t>(k)];
    e.gain_ripple_db = ols.ripple_db[static_cast<size_t>(k)];
    e.gain_range_db = specs.amp_gain_range_db[static_cast<size_t>(k)];
    e.max_total_output_dbm = specs.amp_max_total_output_dbm[static_cast<size_t>(k)];
    return e;
  };
  twin.booster = make_amp(0, "booster");
  for (int i = 0; i < specs.ila_count; ++i) {
    twin.ilas.push_back(make_amp(i + 1, "ila" + std::to_string(i)));
  }
  twin.preamp = make_amp(specs.ila_count + 1, "preamp");
  twin.endpoint_instruments["twin_tx"] = {true, true};
  twin.endpoint_instruments["twin_rx"] = {true, true};
  return twin;
}

}  // namespace optwin::characterization
