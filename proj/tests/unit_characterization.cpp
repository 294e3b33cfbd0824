#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "optwin/characterization.hpp"
#include "optwin/rng.hpp"
#include "optwin/scenario.hpp"
#include "support/test_fixtures.hpp"

using namespace optwin;
using doctest::Approx;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

telemetry::PowerProfile capture(const LineSystem& line, double sigma, std::uint64_t seed,
                                int probe_slot = 24) {
  SpectrumGrid grid = testfix::default_grid();
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg = testfix::make_config(line, plan, -11.2);
  return telemetry::simulate_dlm_capture(line, grid, cfg, plan, probe_slot, 0.1, sigma,
                                         seed);
}

}  // namespace

TEST_CASE("noiseless two-span profile recovers the line exactly") {
  LineSystem line = testfix::make_line(2);
  characterization::LinkEstimate est =
      characterization::analyze_dlm_profile(capture(line, 0.0, 1));
  REQUIRE(est.span_boundaries_km.size() == 1);
  CHECK(near(est.span_boundaries_km[0], 56.0, 0.01));
  REQUIRE(est.span_attenuation_db_per_km.size() == 2);
  CHECK(near(est.span_attenuation_db_per_km[0], 0.2, 1e-6));
  CHECK(near(est.span_attenuation_db_per_km[1], 0.2, 1e-6));
  REQUIRE(est.amp_step_db.size() == 1);
  CHECK(near(est.amp_step_db[0], 11.2, 0.01));
  CHECK(est.loss_events.empty());
  CHECK(est.residual_db_rms <= 1e-9);
  CHECK(near(est.launch_power_dbm, 0.0, 1e-9));
  CHECK(near(est.total_length_km, 112.0, 1e-9));
}

TEST_CASE("noiseless lumped losses are recovered exactly") {
  LineSystem line = testfix::make_line(5);
  line.spans[1].lumped_losses.push_back({20.0, 0.8});
  line.spans[3].lumped_losses.push_back({41.5, 2.5});
  characterization::LinkEstimate est =
      characterization::analyze_dlm_profile(capture(line, 0.0, 1));
  REQUIRE(est.span_boundaries_km.size() == 4);
  REQUIRE(est.loss_events.size() == 2);
  CHECK(near(est.loss_events[0].position_km, 76.0, 0.01));
  CHECK(near(est.loss_events[0].magnitude_db, 0.8, 0.01));
  CHECK(near(est.loss_events[1].position_km, 209.5, 0.01));
  CHECK(near(est.loss_events[1].magnitude_db, 2.5, 0.01));
  for (int i = 0; i < 5; ++i) {
    CHECK(near(est.span_attenuation_db_per_km[static_cast<size_t>(i)], 0.2, 1e-6));
  }
}

TEST_CASE("seeded 3 dB loss is localized within a kilometre") {
  LineSystem line = testfix::make_line(5);
  line.spans[0].lumped_losses.push_back({30.0, 3.0});
  characterization::LinkEstimate est =
      characterization::analyze_dlm_profile(capture(line, 0.2, 7));
  REQUIRE(est.loss_events.size() == 1);
  CHECK(std::abs(est.loss_events[0].position_km - 30.0) <= 1.0);
  CHECK(std::abs(est.loss_events[0].magnitude_db - 3.0) <= 0.5);
}

TEST_CASE("analysis guards") {
  LineSystem line = testfix::make_line(2);
  telemetry::PowerProfile noisy = capture(line, 0.2, 3);
  CHECK_THROWS_AS(characterization::analyze_dlm_profile(noisy, 0.1), Error);
  telemetry::PowerProfile tiny = noisy;
  tiny.position_km.resize(50);
  tiny.power_dbm.resize(50);
  CHECK_THROWS_AS(characterization::analyze_dlm_profile(tiny, 0.6), Error);
}

TEST_CASE("clean profiles rarely produce false loss events") {
  LineSystem line = testfix::make_line(5);
  int false_events = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    characterization::LinkEstimate est =
        characterization::analyze_dlm_profile(capture(line, 0.2, seed));
    if (!est.loss_events.empty() || est.span_boundaries_km.size() != 4) ++false_events;
  }
  CHECK(false_events < 10);  // < 1% of 1000 clean runs
}

// ---------------------------------------------------------------------------
// OLS calibration
// ---------------------------------------------------------------------------

namespace {

struct CalibrationFixture {
  SpectrumGrid grid = testfix::default_grid();
  LineSystem line;
  ChannelPlan plan;
  std::vector<characterization::ProbeRecord> probes;

  CalibrationFixture(const std::vector<double>& nf_db, double ripple_sigma,
                     double fiber_launch_dbm, double osa_sigma, double amp_sigma,
                     std::uint64_t seed, int probe_count = 8) {
    line = testfix::make_line(5);
    std::vector<Edfa*> amps = {&line.booster, &line.ilas[0], &line.ilas[1],
                               &line.ilas[2],  &line.ilas[3], &line.preamp};
    size_t k = 0;
    RngStream rng(seed, "fixture.ripple");
    for (Edfa* a : amps) {
      a->noise_figure_db = nf_db[k++];
      if (ripple_sigma > 0.0) {
        a->gain_ripple_db.resize(static_cast<size_t>(grid.slot_count));
        double mean = 0.0;
        for (double& r : a->gain_ripple_db) {
          r = rng.clipped_normal(ripple_sigma);
          mean += r;
        }
        mean /= grid.slot_count;
        for (double& r : a->gain_ripple_db) r -= mean;
      }
    }
    plan = testfix::make_plan(grid);
    rebuild_probes(fiber_launch_dbm, osa_sigma, amp_sigma, seed, probe_count);
  }

  void rebuild_probes(double fiber_launch_dbm, double osa_sigma, double amp_sigma,
                      std::uint64_t seed, int probe_count) {
    probes.clear();
    for (int p = 0; p < probe_count; ++p) {
      characterization::ProbeRecord rec;
      RngStream prng(seed, "fixture.probe", static_cast<std::uint64_t>(p));
      for (const Edfa* a : line.amps()) {
        double g = a->gain_db, t = 0.0;
        if (p > 0) {
          g += prng.uniform(-1.0, 1.0);
          t += prng.uniform(-0.5, 0.5);
        }
        rec.config.amps.push_back({g, t});
      }
      rec.config.launch_dbm.assign(plan.channels.size(),
                                   fiber_launch_dbm - rec.config.amps[0].gain_db);
      rec.plan = plan;
      rec.far_end = telemetry::simulate_osa_spectrum(
          line, grid, rec.config, plan, "rx", osa_sigma,
          RngStream::derive_seed(seed, "fixture.osa", static_cast<std::uint64_t>(p)));
      rec.amp_readings = telemetry::read_amp_power_monitors(
          line, grid, rec.config, plan, amp_sigma,
          RngStream::derive_seed(seed, "fixture.amp", static_cast<std::uint64_t>(p)));
      probes.push_back(std::move(rec));
    }
  }
};

}  // namespace

TEST_CASE("noiseless calibration recovers noise figures to solver tolerance") {
  std::vector<double> nf = {4.8, 5.0, 5.5, 6.0, 5.2, 5.7};
  CalibrationFixture fx(nf, 0.0, -10.0, 0.0, 0.0, 11);
  characterization::OlsEstimate est =
      characterization::calibrate_ols(fx.probes, public_specs(fx.line, fx.grid));
  REQUIRE(est.noise_figure_db.size() == 6);
  for (size_t k = 0; k < 6; ++k) {
    CHECK(near(est.noise_figure_db[k], nf[k], 0.01));
  }
  CHECK(est.residual_db_rms < 0.01);
  CHECK(est.probe_count == 8);
}

TEST_CASE("seeded calibration recovers noise figures within half a dB") {
  std::vector<double> nf = {5.3, 5.0, 5.5, 6.0, 5.2, 4.9};
  CalibrationFixture fx(nf, 0.05, -6.0, 0.1, 0.1, 23);
  characterization::OlsEstimate est =
      characterization::calibrate_ols(fx.probes, public_specs(fx.line, fx.grid));
  for (size_t k = 0; k < 6; ++k) {
    CHECK(std::abs(est.noise_figure_db[k] - nf[k]) <= 0.5);
  }
  for (const auto& r : est.ripple_db) {
    double mean = 0.0;
    for (double v : r) mean += v;
    CHECK(std::abs(mean / r.size()) < 1e-9);
  }
}

TEST_CASE("aggregate ripple reconstruction matches the true sum") {
  std::vector<double> nf = {5.0, 5.0, 5.0, 5.0, 5.0, 5.0};
  CalibrationFixture fx(nf, 0.08, -10.0, 0.0, 0.0, 31);
  characterization::OlsEstimate est =
      characterization::calibrate_ols(fx.probes, public_specs(fx.line, fx.grid));
  for (int s = 1; s + 1 < fx.grid.slot_count; ++s) {
    double truth = 0.0;
    for (const Edfa* a : fx.line.amps()) truth += a->ripple_at(s);
    double recovered = 0.0;
    for (const auto& r : est.ripple_db) recovered += r[static_cast<size_t>(s)];
    CHECK(near(recovered, truth, 0.02));
  }
}

TEST_CASE("calibration guards") {
  std::vector<double> nf = {5.0, 5.0, 5.0, 5.0, 5.0, 5.0};
  CalibrationFixture fx(nf, 0.0, -10.0, 0.0, 0.0, 7);
  PublicLineSpecs specs = public_specs(fx.line, fx.grid);

  std::vector<characterization::ProbeRecord> two(fx.probes.begin(),
                                                 fx.probes.begin() + 2);
  CHECK_THROWS_AS(characterization::calibrate_ols(two, specs), Error);

  // identical settings on every probe: rank deficient
  std::vector<characterization::ProbeRecord> degenerate;
  for (int i = 0; i < 8; ++i) degenerate.push_back(fx.probes[0]);
  try {
    characterization::calibrate_ols(degenerate, specs);
    FAIL("expected rank error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

// ---------------------------------------------------------------------------
// Transceiver fit
// ---------------------------------------------------------------------------

namespace {

telemetry::VoaSweepRecord make_sweep(double truth_db, double sigma, std::uint64_t seed) {
  TransceiverPort port;
  port.id = "p";
  port.snr_trx_true_db = truth_db;
  ModulationFormat fmt{"dp16qam_400g", 4.0, "dp-16qam", 400.0, 63.1};
  std::vector<double> attens;
  for (int a = 0; a <= 20; a += 2) attens.push_back(a);
  return telemetry::simulate_voa_sweep(port, fmt, attens, 40.0, 0.0, sigma, seed);
}

const ModulationFormat kFmt{"dp16qam_400g", 4.0, "dp-16qam", 400.0, 63.1};

}  // namespace

TEST_CASE("noiseless transceiver fit is exact") {
  characterization::TrxEstimate est =
      characterization::fit_transceiver_noise(make_sweep(24.0, 0.0, 1), kFmt);
  CHECK(std::abs(est.snr_trx_db - 24.0) <= 0.05);
  CHECK(std::abs(est.knee_dbm - telemetry::kReceiverKneeDbm) <= 0.5);
  CHECK(est.residual_log10_ber < 1e-3);
}

TEST_CASE("golden sweep recovers the transceiver noise within 0.3 dB") {
  characterization::TrxEstimate est =
      characterization::fit_transceiver_noise(make_sweep(24.0, 0.1, 7), kFmt);
  CHECK(std::abs(est.snr_trx_db - 24.0) <= 0.3);
}

TEST_CASE("transceiver fit guards") {
  telemetry::VoaSweepRecord sweep = make_sweep(24.0, 0.0, 1);
  sweep.points.resize(3);
  CHECK_THROWS_AS(characterization::fit_transceiver_noise(sweep, kFmt), Error);

  telemetry::VoaSweepRecord shuffled = make_sweep(24.0, 0.0, 1);
  std::swap(shuffled.points[0].attenuation_db, shuffled.points[1].attenuation_db);
  CHECK_THROWS_AS(characterization::fit_transceiver_noise(shuffled, kFmt), Error);

  telemetry::VoaSweepRecord saturated = make_sweep(24.0, 0.0, 1);
  for (auto& p : saturated.points) p.saturated = true;
  CHECK_THROWS_AS(characterization::fit_transceiver_noise(saturated, kFmt), Error);
}

// ---------------------------------------------------------------------------
// Profile comparison and twin assembly
// ---------------------------------------------------------------------------

TEST_CASE("profile comparison") {
  LineSystem line = testfix::make_line(2);
  telemetry::PowerProfile before = capture(line, 0.0, 1);

  SUBCASE("identical profiles difference to zero") {
    characterization::ProfileDelta d = characterization::compare_profiles(before, before);
    CHECK(d.max_abs_db <= 1e-12);
    CHECK(std::abs(d.mean_db) <= 1e-12);
  }
  SUBCASE("a +2 dB launch shows up as a +2 dB delta") {
    SpectrumGrid grid = testfix::default_grid();
    ChannelPlan plan = testfix::make_plan(grid);
    qot::LineConfig hot = testfix::make_config(line, plan, -9.2);
    telemetry::PowerProfile after =
        telemetry::simulate_dlm_capture(line, grid, hot, plan, 24, 0.1, 0.0, 1);
    characterization::ProfileDelta d = characterization::compare_profiles(before, after);
    CHECK(near(d.mean_db, 2.0, 1e-9));
    CHECK(near(d.delta_db.front(), 2.0, 1e-9));
  }
  SUBCASE("different lengths are rejected") {
    telemetry::PowerProfile other = capture(testfix::make_line(3), 0.0, 1);
    CHECK_THROWS_AS(characterization::compare_profiles(before, other), Error);
  }
}

TEST_CASE("assembled twin reproduces the hidden line") {
  LineSystem truth = testfix::make_line(5);
  truth.spans[1].lumped_losses.push_back({20.0, 0.8});
  std::vector<double> nf = {5.3, 5.0, 5.5, 6.0, 5.2, 4.9};
  {
    std::vector<Edfa*> amps = {&truth.booster, &truth.ilas[0], &truth.ilas[1],
                               &truth.ilas[2], &truth.ilas[3], &truth.preamp};
    size_t k = 0;
    for (Edfa* a : amps) a->noise_figure_db = nf[k++];
  }
  SpectrumGrid grid = testfix::default_grid();
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg = testfix::make_config(truth, plan, -11.2);

  telemetry::PowerProfile profile =
      telemetry::simulate_dlm_capture(truth, grid, cfg, plan, 24, 0.1, 0.0, 5);
  characterization::LinkEstimate link = characterization::analyze_dlm_profile(profile);

  // probes taken on the same hidden line
  CalibrationFixture cal(nf, 0.0, -10.0, 0.0, 0.0, 3);
  cal.line = truth;
  cal.rebuild_probes(-10.0, 0.0, 0.0, 3, 8);
  characterization::OlsEstimate ols =
      characterization::calibrate_ols(cal.probes, public_specs(truth, grid));

  LineSystem twin =
      characterization::assemble_line_model(link, ols, public_specs(truth, grid));
  CHECK(twin.spans.size() == 5);
  CHECK(twin.ilas.size() == 4);
  CHECK(near(twin.total_length_km(), 280.0, 0.01));
  REQUIRE(twin.spans[1].lumped_losses.size() == 1);
  CHECK(near(twin.spans[1].lumped_losses[0].position_km, 20.0, 0.05));
  CHECK(near(twin.spans[1].lumped_losses[0].loss_db, 0.8, 0.05));
  for (size_t k = 0; k < 6; ++k) {
    CHECK(near(twin.amps()[k]->noise_figure_db, nf[k], 0.02));
  }

  // noiseless end-to-end: twin propagation matches the hidden truth closely
  qot::PropagationResult t_truth = qot::propagate_gsnr(truth, grid, cfg, plan);
  qot::PropagationResult t_twin = qot::propagate_gsnr(twin, grid, cfg, plan);
  for (size_t c = 0; c < plan.channels.size(); ++c) {
    CHECK(near(t_twin.taps.back().gsnr.channels[c].gsnr_db,
               t_truth.taps.back().gsnr.channels[c].gsnr_db, 0.05));
  }
}
