#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "optwin/rng.hpp"
#include "optwin/telemetry.hpp"
#include "support/test_fixtures.hpp"

using namespace optwin;
using doctest::Approx;

namespace {

// 2 x 56 km line with a single ILA, fiber launch 0 dBm per channel.
struct TwoSpanFixture {
  SpectrumGrid grid = testfix::default_grid();
  LineSystem line = testfix::make_line(2);
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg = testfix::make_config(line, plan, -11.2);
};

}  // namespace

TEST_CASE("noiseless dlm profile is the exact piecewise construction") {
  TwoSpanFixture f;
  telemetry::PowerProfile p = telemetry::simulate_dlm_capture(
      f.line, f.grid, f.cfg, f.plan, 24, 0.1, 0.0, 1);
  REQUIRE(p.position_km.size() == 1121);
  CHECK(p.position_km.front() == Approx(0.0));
  CHECK(p.position_km.back() == Approx(112.0));
  CHECK(p.power_dbm.front() == Approx(0.0));

  auto at = [&](double pos) {
    size_t i = static_cast<size_t>(std::lround(pos / 0.1));
    return p.power_dbm[i];
  };
  CHECK(at(55.9) == Approx(-11.18).epsilon(1e-9));
  CHECK(at(56.0) == Approx(0.0).epsilon(1e-9));  // sample at the amp is post-step
  CHECK(at(112.0) == Approx(-11.2).epsilon(1e-9));
  CHECK(telemetry::dlm_power_at(f.line, f.grid, f.cfg, f.plan, 24, 56.0, true) ==
        Approx(-11.2).epsilon(1e-9));
  CHECK(telemetry::dlm_power_at(f.line, f.grid, f.cfg, f.plan, 24, 56.0, false) ==
        Approx(0.0).epsilon(1e-9));
}

TEST_CASE("a lumped loss superimposes a downward step") {
  TwoSpanFixture f;
  f.line.spans[0].lumped_losses.push_back({30.0, 3.0});
  telemetry::PowerProfile p = telemetry::simulate_dlm_capture(
      f.line, f.grid, f.cfg, f.plan, 24, 0.1, 0.0, 1);
  auto at = [&](double pos) {
    return p.power_dbm[static_cast<size_t>(std::lround(pos / 0.1))];
  };
  CHECK(at(29.9) == Approx(-5.98).epsilon(1e-9));
  CHECK(at(30.0) == Approx(-9.0).epsilon(1e-9));
  CHECK(at(112.0) == Approx(-14.2).epsilon(1e-9));
}

TEST_CASE("dlm capture is deterministic per seed") {
  TwoSpanFixture f;
  telemetry::PowerProfile a = telemetry::simulate_dlm_capture(
      f.line, f.grid, f.cfg, f.plan, 24, 0.1, 0.2, 99);
  telemetry::PowerProfile b = telemetry::simulate_dlm_capture(
      f.line, f.grid, f.cfg, f.plan, 24, 0.1, 0.2, 99);
  telemetry::PowerProfile c = telemetry::simulate_dlm_capture(
      f.line, f.grid, f.cfg, f.plan, 24, 0.1, 0.2, 100);
  CHECK(a.power_dbm == b.power_dbm);
  CHECK(a.power_dbm != c.power_dbm);
}

TEST_CASE("dlm guards") {
  TwoSpanFixture f;
  CHECK_THROWS_AS(
      telemetry::simulate_dlm_capture(f.line, f.grid, f.cfg, f.plan, 24, 0.0, 0.0, 1),
      Error);
  CHECK_THROWS_AS(
      telemetry::simulate_dlm_capture(f.line, f.grid, f.cfg, f.plan, 0, 0.1, 0.0, 1),
      Error);
}

TEST_CASE("osa spectrum symmetry and tilt attribution") {
  TwoSpanFixture f;
  telemetry::OsaSpectrum flat = telemetry::simulate_osa_spectrum(
      f.line, f.grid, f.cfg, f.plan, "rx", 0.0, 1);
  double lo = 1e9, hi = -1e9;
  for (int s = 1; s + 1 < f.grid.slot_count; ++s) {
    lo = std::min(lo, flat.slot_power_dbm[static_cast<size_t>(s)]);
    hi = std::max(hi, flat.slot_power_dbm[static_cast<size_t>(s)]);
  }
  CHECK(hi - lo < 0.01);  // flat launch, flat gains: flat received comb

  qot::LineConfig tilted = f.cfg;
  tilted.amps[1].tilt_db = 1.0;
  telemetry::OsaSpectrum t = telemetry::simulate_osa_spectrum(
      f.line, f.grid, tilted, f.plan, "rx", 0.0, 1);
  double edge_lo = t.slot_power_dbm[1] - flat.slot_power_dbm[1];
  double edge_hi = t.slot_power_dbm[46] - flat.slot_power_dbm[46];
  CHECK(edge_hi - edge_lo == Approx(1.0 * (45.0 / 47.0)).epsilon(0.01));
}

TEST_CASE("osa requires an instrument at the endpoint") {
  TwoSpanFixture f;
  f.line.endpoint_instruments["rx"].osa = false;
  CHECK_THROWS_AS(
      telemetry::simulate_osa_spectrum(f.line, f.grid, f.cfg, f.plan, "rx", 0.0, 1),
      Error);
  CHECK_THROWS_AS(
      telemetry::simulate_osa_spectrum(f.line, f.grid, f.cfg, f.plan, "elsewhere", 0.0, 1),
      Error);
}

TEST_CASE("voa sweep limit case and monotonicity") {
  TransceiverPort port;
  port.id = "p1";
  port.snr_trx_true_db = 24.0;
  ModulationFormat fmt{"dp16qam_400g", 4.0, "dp-16qam", 400.0, 63.1};
  std::vector<double> attens;
  for (int a = 0; a <= 20; a += 2) attens.push_back(a);
  telemetry::VoaSweepRecord clean =
      telemetry::simulate_voa_sweep(port, fmt, attens, 40.0, 0.0, 0.0, 1);
  REQUIRE(clean.points.size() == 11);
  // frozen from the independent closed-form evaluation
  CHECK(clean.points[0].ber == Approx(9.565691752082053e-13).epsilon(1e-9));
  CHECK(clean.points[8].ber == Approx(1.4910032847095716e-10).epsilon(1e-9));
  CHECK(clean.points[10].ber == Approx(2.694557455542905e-05).epsilon(1e-9));
  for (size_t i = 1; i < clean.points.size(); ++i) {
    CHECK(clean.points[i].ber >= clean.points[i - 1].ber);
  }

  // the closed-form BER only approaches 0.5 from below, so saturation is a
  // noisy-counting phenomenon: deep attenuation plus counting noise must
  // eventually cap at 0.5 - eps with the flag set
  TransceiverPort weak = port;
  weak.snr_trx_true_db = 12.0;
  ModulationFormat qpsk{"qpsk", 2.0, "dp-qpsk", 100.0, 32.0};
  int saturated_seen = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    telemetry::VoaSweepRecord sat = telemetry::simulate_voa_sweep(
        weak, qpsk, {0.0, 10.0, 25.0, 60.0}, 40.0, 0.0, 0.3, seed);
    for (const auto& p : sat.points) {
      if (p.saturated) {
        ++saturated_seen;
        CHECK(p.ber == Approx(0.5).epsilon(1e-6));
        CHECK(p.ber < 0.5);
      }
    }
  }
  CHECK(saturated_seen > 0);

  CHECK_THROWS_AS(
      telemetry::simulate_voa_sweep(port, fmt, {0.0, 0.0}, 40.0, 0.0, 0.0, 1), Error);
  CHECK_THROWS_AS(telemetry::simulate_voa_sweep(port, fmt, {}, 40.0, 0.0, 0.0, 1), Error);
}

TEST_CASE("voa sweep matches its golden fixture") {
  TransceiverPort port;
  port.id = "golden_port";
  port.snr_trx_true_db = 24.0;
  ModulationFormat fmt{"dp16qam_400g", 4.0, "dp-16qam", 400.0, 63.1};
  std::vector<double> attens;
  for (int a = 0; a <= 20; a += 2) attens.push_back(a);
  telemetry::VoaSweepRecord sweep =
      telemetry::simulate_voa_sweep(port, fmt, attens, 40.0, 0.0, 0.1, 7);

  std::ifstream golden(std::string(OPTWIN_SOURCE_DIR) +
                       "/tests/golden/voa_sweep_seed7.csv");
  REQUIRE(golden.good());
  std::string header, row;
  std::getline(golden, header);
  size_t i = 0;
  while (std::getline(golden, row)) {
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream ss(row);
    double a, ber;
    int saturated;
    ss >> a >> ber >> saturated;
    REQUIRE(i < sweep.points.size());
    CHECK(sweep.points[i].attenuation_db == Approx(a));
    CHECK(sweep.points[i].ber == Approx(ber).epsilon(1e-10));
    CHECK(static_cast<int>(sweep.points[i].saturated) == saturated);
    ++i;
  }
  CHECK(i == 11);
}

TEST_CASE("amp power monitors") {
  SpectrumGrid grid = testfix::default_grid();
  ChannelPlan plan = testfix::make_plan(grid);

  SUBCASE("noiseless single amp reads its configured gain") {
    LineSystem line = testfix::make_line(1, 100.0, 0.2);  // gain 20 dB
    qot::LineConfig cfg = testfix::make_config(line, plan, -20.0);
    auto readings = telemetry::read_amp_power_monitors(line, grid, cfg, plan, 0.0, 1);
    REQUIRE(readings.size() == 2);
    // the total-power meter also sees the amp's own ASE (~0.02 dB here)
    CHECK(readings[0].output_dbm - readings[0].input_dbm == Approx(20.0).epsilon(1e-3));
  }

  SUBCASE("seeded readings match the golden fixture") {
    LineSystem line = testfix::make_line(3);
    qot::LineConfig cfg = testfix::make_config(line, plan, -11.2);
    auto readings = telemetry::read_amp_power_monitors(line, grid, cfg, plan, 0.1, 3);
    std::ifstream golden(std::string(OPTWIN_SOURCE_DIR) +
                         "/tests/golden/amp_readings_seed3.csv");
    REQUIRE(golden.good());
    std::string header, row;
    std::getline(golden, header);
    size_t i = 0;
    while (std::getline(golden, row)) {
      std::replace(row.begin(), row.end(), ',', ' ');
      std::istringstream ss(row);
      std::string id;
      double in, out;
      ss >> id >> in >> out;
      REQUIRE(i < readings.size());
      CHECK(readings[i].amp_id == id);
      CHECK(readings[i].input_dbm == Approx(in).epsilon(1e-10));
      CHECK(readings[i].output_dbm == Approx(out).epsilon(1e-10));
      ++i;
    }
    CHECK(i == readings.size());
  }

  SUBCASE("clipped noise keeps readings inside the sanity window") {
    LineSystem line = testfix::make_line(2);
    qot::LineConfig cfg = testfix::make_config(line, plan, -11.2);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      auto readings = telemetry::read_amp_power_monitors(line, grid, cfg, plan, 0.5, seed);
      for (size_t k = 0; k < readings.size(); ++k) {
        double gain = cfg.amps[k].gain_db;
        double measured = readings[k].output_dbm - readings[k].input_dbm;
        CHECK(measured >= gain - 3.0 - 1e-6);
        CHECK(measured <= gain + 3.0 + 1e-6);
      }
    }
  }
}

TEST_CASE("receiver noise knee model") {
  CHECK(telemetry::receiver_snr_trx_db(24.0, 0.0, 5.0) == Approx(24.0));
  CHECK(telemetry::receiver_snr_trx_db(24.0, 0.0, 15.0) == Approx(24.0));
  CHECK(telemetry::receiver_snr_trx_db(24.0, 0.0, 18.0) == Approx(21.0));
  CHECK(telemetry::receiver_snr_trx_db(24.0, -5.0, 15.0) == Approx(19.0));
}
