#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "optwin/optimizer.hpp"
#include "optwin/qot.hpp"
#include "optwin/rng.hpp"
#include "support/test_fixtures.hpp"

using namespace optwin;
using doctest::Approx;

// Expected values frozen from tests/support/oracle.py (independent scalar
// evaluation of the closed forms).

TEST_CASE("effective length") {
  CHECK(qot::effective_length_km(0.2, 80.0) == Approx(21.169274886976456).epsilon(1e-9));
  CHECK(qot::effective_length_km(0.2, 56.0) == Approx(20.067493820508965).epsilon(1e-9));
  CHECK(qot::effective_length_km(0.0, 80.0) == Approx(80.0));
  CHECK(qot::effective_length_km(0.2, 0.0) == Approx(0.0));
  CHECK_THROWS_AS(qot::effective_length_km(-0.1, 10.0), Error);
}

TEST_CASE("ase power") {
  double p = qot::ase_power_w(20.0, 5.0, 193.4e12, 12.5e9);
  CHECK(p == Approx(5.014847222778139e-07).epsilon(1e-9));
  CHECK(w_to_dbm(p) == Approx(-32.99742293214866).epsilon(1e-9));
  CHECK(qot::ase_power_w(0.0, 7.0, 193.4e12, 12.5e9) == Approx(0.0));
  // doubling the linear noise figure doubles the power
  double nf3 = qot::ase_power_w(20.0, 3.0, 193.4e12, 12.5e9);
  double nf6 = qot::ase_power_w(20.0, 3.0 + 10.0 * std::log10(2.0), 193.4e12, 12.5e9);
  CHECK(nf6 / nf3 == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("nli per span") {
  FiberSpan span = testfix::make_span("s", 56.0, 0.2, 21.7, 1.3);
  double g = qot::nli_psd_per_span(span, 1e-14, 4.8e12);
  CHECK(g == Approx(1.5776789562591141e-18).epsilon(1e-9));
  CHECK(w_to_dbm(g * 63.1e9) == Approx(-40.019520079853095).epsilon(1e-9));
  CHECK(qot::nli_psd_per_span(span, 0.0, 4.8e12) == Approx(0.0));
  // cubic scaling in the WDM PSD
  double g2 = qot::nli_psd_per_span(span, 2e-14, 4.8e12);
  CHECK(g2 / g == Approx(8.0).epsilon(1e-12));
  FiberSpan flat = span;
  flat.dispersion_beta2_ps2_km = 0.05;
  CHECK_THROWS_AS(qot::nli_psd_per_span(flat, 1e-14, 4.8e12), Error);
}

TEST_CASE("snr combination") {
  // canonical three-term case {20, 30, 25} dB
  double combined = qot::combine_with_transceiver(
      qot::combine_with_transceiver(20.0, 30.0), 25.0);
  CHECK(combined == Approx(18.488668952552864).epsilon(1e-12));
  CHECK(qot::combine_with_transceiver(17.0, INFINITY) == Approx(17.0));
  CHECK(qot::combine_with_transceiver(20.0, 20.0) ==
        Approx(20.0 - 10.0 * std::log10(2.0)).epsilon(1e-12));
  // commutative and never above either input
  RngStream rng(7);
  for (int i = 0; i < 200; ++i) {
    double a = rng.uniform(5.0, 35.0), b = rng.uniform(5.0, 35.0);
    CHECK(qot::combine_with_transceiver(a, b) ==
          Approx(qot::combine_with_transceiver(b, a)).epsilon(1e-12));
    CHECK(qot::combine_with_transceiver(a, b) <= std::min(a, b));
  }
}

TEST_CASE("ber curves") {
  ModulationFormat qam{"800g", 4.0, "dp-16qam", 800.0, 130.0};
  ModulationFormat qpsk{"100g", 2.0, "dp-qpsk", 100.0, 32.0};
  CHECK(qot::ber_from_gsnr(qam, 17.0) == Approx(5.795061115338333e-4).epsilon(1e-9));
  CHECK(qot::ber_from_gsnr(qpsk, 10.0) == Approx(7.827011290012744e-4).epsilon(1e-9));
  for (double snr = 5.0; snr < 20.0; snr += 0.5) {
    CHECK(qot::ber_from_gsnr(qam, snr + 0.5) < qot::ber_from_gsnr(qam, snr));
  }
  ModulationFormat bad{"x", 4.0, "dp-64qam", 100.0, 10.0};
  CHECK_THROWS_AS(qot::ber_from_gsnr(bad, 15.0), Error);
}

TEST_CASE("required gsnr") {
  ModulationFormat qam{"800g", 4.0, "dp-16qam", 800.0, 130.0};
  double req = qot::required_gsnr_db(qam, 2.0e-2);
  CHECK(req == Approx(12.710795955536014).epsilon(1e-6));
  for (double b : {1e-3, 2e-2, 1e-4}) {
    double g = qot::required_gsnr_db(qam, b);
    CHECK(qot::ber_from_gsnr(qam, g) == Approx(b).epsilon(1e-4));
  }
  CHECK_THROWS_AS(qot::required_gsnr_db(qam, 0.6), Error);
  CHECK_THROWS_AS(qot::required_gsnr_db(qam, 0.0), Error);
}

namespace {

qot::PropagationResult reference_walk(double launch_offset_db) {
  SpectrumGrid grid = testfix::default_grid();
  LineSystem line = testfix::make_line(5);
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg = testfix::make_config(line, plan, -11.2 + launch_offset_db);
  return qot::propagate_gsnr(line, grid, cfg, plan);
}

}  // namespace

TEST_CASE("propagation matches the independent oracle") {
  qot::PropagationResult result = reference_walk(0.0);
  REQUIRE(result.taps.size() == 6);  // booster + 4 ILAs + preamp
  const qot::GsnrSpectrum& end = result.taps.back().gsnr;
  REQUIRE(end.channels.size() == 46);

  std::ifstream golden(std::string(OPTWIN_SOURCE_DIR) +
                       "/tests/golden/propagate_eol_gsnr.csv");
  REQUIRE(golden.good());
  std::string header;
  std::getline(golden, header);
  size_t i = 0;
  std::string row;
  while (std::getline(golden, row)) {
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream ss(row);
    int slot;
    double gsnr, ase, nli;
    ss >> slot >> gsnr >> ase >> nli;
    REQUIRE(i < end.channels.size());
    CHECK(end.channels[i].slot_index == slot);
    CHECK(end.channels[i].gsnr_db == Approx(gsnr).epsilon(1e-9));
    CHECK(end.channels[i].snr_ase_db == Approx(ase).epsilon(1e-9));
    CHECK(end.channels[i].snr_nli_db == Approx(nli).epsilon(1e-9));
    ++i;
  }
  CHECK(i == end.channels.size());
}

TEST_CASE("degenerate single-amp walk hits the cap sentinel") {
  SpectrumGrid grid = testfix::default_grid();
  Edfa amp = testfix::make_amp("only", 0.0);
  std::vector<qot::WalkElement> elements = {qot::WalkAmp{&amp}};
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg;
  cfg.amps.push_back({0.0, 0.0});
  cfg.launch_dbm.assign(plan.channels.size(), 0.0);
  qot::PropagationResult r = qot::propagate_walk(elements, grid, cfg, plan);
  for (const auto& c : r.taps.back().gsnr.channels) {
    CHECK(c.gsnr_db == Approx(qot::kGsnrCapDb));
    CHECK(c.snr_ase_db == Approx(qot::kGsnrCapDb));
    CHECK(c.snr_nli_db == Approx(qot::kGsnrCapDb));
  }
}

TEST_CASE("gsnr is non-increasing along the line") {
  qot::PropagationResult r = reference_walk(0.0);
  for (size_t t = 1; t < r.taps.size(); ++t) {
    for (size_t c = 0; c < r.taps[t].gsnr.channels.size(); ++c) {
      CHECK(r.taps[t].gsnr.channels[c].gsnr_db <=
            r.taps[t - 1].gsnr.channels[c].gsnr_db + 1e-9);
    }
  }
}

TEST_CASE("a mid-span lumped loss lowers every downstream gsnr") {
  SpectrumGrid grid = testfix::default_grid();
  LineSystem base = testfix::make_line(5);
  LineSystem lossy = base;
  lossy.spans[2].lumped_losses.push_back({28.0, 3.0});
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg = testfix::make_config(base, plan, -11.2);
  qot::PropagationResult a = qot::propagate_gsnr(base, grid, cfg, plan);
  qot::PropagationResult b = qot::propagate_gsnr(lossy, grid, cfg, plan);
  // taps 0..2 precede the loss; 3..5 follow it
  for (size_t t = 3; t < a.taps.size(); ++t) {
    for (size_t c = 0; c < a.taps[t].gsnr.channels.size(); ++c) {
      CHECK(b.taps[t].gsnr.channels[c].gsnr_db < a.taps[t].gsnr.channels[c].gsnr_db);
    }
  }
}

TEST_CASE("incoherent nli scaling: +1 dB launch costs exactly 2 dB of nli snr") {
  qot::PropagationResult base = reference_walk(0.0);
  qot::PropagationResult hot = reference_walk(1.0);
  for (size_t c = 0; c < base.taps.back().gsnr.channels.size(); ++c) {
    double d = hot.taps.back().gsnr.channels[c].snr_nli_db -
               base.taps.back().gsnr.channels[c].snr_nli_db;
    CHECK(d == Approx(-2.0).epsilon(1e-9));
  }
}

TEST_CASE("loss of signal names the starving element") {
  SpectrumGrid grid = testfix::default_grid();
  LineSystem line = testfix::make_line(2);
  line.spans[0].lumped_losses.push_back({10.0, 45.0});
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg = testfix::make_config(line, plan, -11.2);
  try {
    qot::propagate_gsnr(line, grid, cfg, plan);
    FAIL("expected loss of signal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LossOfSignal);
    CHECK(std::string(e.what()).find("ila0") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  SpectrumGrid grid = testfix::default_grid();
  LineSystem line = testfix::make_line(2);
  line.booster.gain_range_db = {10.0, 12.0};
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg = testfix::make_config(line, plan, -11.2);
  cfg.amps[0].gain_db = 15.0;
  CHECK_THROWS_AS(qot::validate_config(line, grid, cfg, plan), Error);
  cfg.amps[0].gain_db = 11.2;
  line.booster.max_total_output_dbm = 10.0;  // 46 ch at 0 dBm is ~16.6 dBm
  CHECK_THROWS_AS(qot::validate_config(line, grid, cfg, plan), Error);
}

TEST_CASE("analytic launch-offset derivative matches finite differences") {
  double h = 0.005;
  qot::PropagationResult at = reference_walk(0.7);
  qot::PropagationResult lo = reference_walk(0.7 - h);
  qot::PropagationResult hi = reference_walk(0.7 + h);
  std::vector<double> analytic = qot::gsnr_offset_derivative(at);
  for (size_t c = 0; c < analytic.size(); ++c) {
    double fd = (hi.taps.back().gsnr.channels[c].gsnr_db -
                 lo.taps.back().gsnr.channels[c].gsnr_db) /
                (2.0 * h);
    CHECK(analytic[c] == Approx(fd).epsilon(1e-4));
  }
  auto objective = [](const qot::PropagationResult& r) {
    return optimizer::flatness_objective_db(r.taps.back().gsnr, 0.5);
  };
  double obj_fd = (objective(hi) - objective(lo)) / (2.0 * h);
  CHECK(qot::objective_offset_derivative(at, 0.5) == Approx(obj_fd).epsilon(1e-4));
}

TEST_CASE("randomized lines: monotone gsnr and exact cubic scaling") {
  RngStream rng(4242);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int spans = 1 + static_cast<int>(rng.uniform() * 5.0);
    double span_km = rng.uniform(40.0, 100.0);
    double atten = rng.uniform(0.17, 0.25);
    double nf = rng.uniform(4.0, 7.0);
    LineSystem line = testfix::make_line(spans, span_km, atten, nf);
    SpectrumGrid grid = testfix::default_grid();
    ChannelPlan plan = testfix::make_plan(grid);
    double fiber_launch = rng.uniform(-3.0, 1.0);
    qot::LineConfig cfg = testfix::make_config(line, plan, fiber_launch - line.booster.gain_db);
    qot::PropagationResult a = qot::propagate_gsnr(line, grid, cfg, plan);
    for (size_t t = 1; t < a.taps.size(); ++t) {
      for (size_t c = 0; c < a.taps[t].gsnr.channels.size(); ++c) {
        CHECK(a.taps[t].gsnr.channels[c].gsnr_db <=
              a.taps[t - 1].gsnr.channels[c].gsnr_db + 1e-9);
      }
    }
    qot::LineConfig hot = cfg;
    for (double& l : hot.launch_dbm) l += 1.0;
    qot::PropagationResult b = qot::propagate_gsnr(line, grid, hot, plan);
    for (size_t c = 0; c < a.taps.back().gsnr.channels.size(); ++c) {
      double d = b.taps.back().gsnr.channels[c].snr_nli_db -
                 a.taps.back().gsnr.channels[c].snr_nli_db;
      CHECK(d == Approx(-2.0).epsilon(1e-9));
    }
    ++checked;
  }
  CHECK(checked == 1000);
}
