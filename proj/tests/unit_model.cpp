#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "optwin/json_io.hpp"
#include "optwin/scenario.hpp"
#include "support/test_fixtures.hpp"

using namespace optwin;
using doctest::Approx;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(OPTWIN_SOURCE_DIR) + "/scenarios/" + name;
}

}  // namespace

TEST_CASE("carrier frequency arithmetic") {
  SpectrumGrid g = testfix::default_grid();
  CHECK(carrier_frequency_thz(g, 0) == Approx(191.35));
  CHECK(carrier_frequency_thz(g, 47) == Approx(196.05));  // 191.35 + 4.7
  CHECK_THROWS_AS(carrier_frequency_thz(g, 48), Error);
  CHECK_THROWS_AS(carrier_frequency_thz(g, -1), Error);
  for (int s = 1; s < g.slot_count; ++s) {
    CHECK(carrier_frequency_thz(g, s) > carrier_frequency_thz(g, s - 1));
  }
}

TEST_CASE("total line length") {
  CHECK(total_length_km(testfix::make_line(5, 56.0)) == Approx(280.0));
  CHECK(total_length_km(testfix::make_line(1, 50.0)) == Approx(50.0));
}

TEST_CASE("reference scenario validates and matches the committed fixture") {
  std::ifstream f(scenario_path("reference_recovery.json"));
  REQUIRE(f.good());
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Scenario s = validate_scenario(text);
  CHECK(s.line_systems.size() == 2);
  const LineSystem& longhaul = s.line("longhaul");
  CHECK(longhaul.spans.size() == 5);
  CHECK(longhaul.ilas.size() == 4);
  CHECK(total_length_km(longhaul) == Approx(280.0));
  CHECK(s.line("metro").spans.size() == 1);
  CHECK(s.transceivers.size() == 12);
  CHECK(s.disaster.fuel_hours == Approx(8.0));

  // builder output and committed fixture stay in lockstep
  CHECK(serialize_scenario(make_reference_scenario()) == text);
}

TEST_CASE("scenario round-trips through serialization") {
  for (std::uint64_t seed : {1ull, 42ull, 99ull}) {
    ReferenceScenarioOptions opts;
    opts.seed = seed;
    opts.fuel_hours = 8.0 + static_cast<double>(seed % 16);
    Scenario a = make_reference_scenario(opts);
    Scenario b = validate_scenario(serialize_scenario(a));
    CHECK(scenarios_equal(a, b));
  }
}

TEST_CASE("schema, reference and invariant errors are distinguished") {
  Scenario s = make_reference_scenario();
  std::string good = serialize_scenario(s);

  SUBCASE("unknown top-level key") {
    nlohmann::json j = nlohmann::json::parse(good);
    j["extra"] = 1;
    try {
      validate_scenario(j.dump());
      FAIL("expected schema error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Schema);
    }
  }
  SUBCASE("missing field") {
    nlohmann::json j = nlohmann::json::parse(good);
    j.erase("seed");
    try {
      validate_scenario(j.dump());
      FAIL("expected schema error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Schema);
    }
  }
  SUBCASE("dangling operator reference") {
    nlohmann::json j = nlohmann::json::parse(good);
    j["nodes"][0]["operator_id"] = "ghost";
    try {
      validate_scenario(j.dump());
      FAIL("expected reference error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Reference);
    }
  }
  SUBCASE("ILA count must be span count minus one") {
    nlohmann::json j = nlohmann::json::parse(good);
    for (auto& line : j["line_systems"]) {
      if (line["id"] == "longhaul") {
        auto ilas = line["ilas"];
        ilas.erase(ilas.size() - 1);
        line["ilas"] = ilas;
      }
    }
    try {
      validate_scenario(j.dump());
      FAIL("expected invariant error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Invariant);
      CHECK(std::string(e.what()).find("ILA") != std::string::npos);
    }
  }
  SUBCASE("fuel outside 8..24 needs an override") {
    nlohmann::json j = nlohmann::json::parse(good);
    j["disaster"]["fuel_hours"] = 4.0;
    try {
      validate_scenario(j.dump());
      FAIL("expected invariant error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Invariant);
    }
    j["disaster"]["fuel_override"] = true;
    Scenario v = validate_scenario(j.dump());
    CHECK(v.disaster.fuel_hours == Approx(4.0));
    CHECK(v.data_center("dc_west").fuel_hours_remaining == Approx(4.0));
  }
  SUBCASE("fuel at the bounds is fine") {
    nlohmann::json j = nlohmann::json::parse(good);
    j["disaster"]["fuel_hours"] = 8.0;
    CHECK(validate_scenario(j.dump()).disaster.fuel_hours == Approx(8.0));
    j["disaster"]["fuel_hours"] = 24.0;
    CHECK(validate_scenario(j.dump()).disaster.fuel_hours == Approx(24.0));
  }
  SUBCASE("ripple must be zero mean") {
    nlohmann::json j = nlohmann::json::parse(good);
    for (auto& line : j["line_systems"]) {
      if (line["id"] == "longhaul") {
        auto ripple = line["booster"]["gain_ripple_db"].get<std::vector<double>>();
        ripple[0] += 1.0;
        line["booster"]["gain_ripple_db"] = ripple;
      }
    }
    try {
      validate_scenario(j.dump());
      FAIL("expected invariant error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Invariant);
    }
  }
}

TEST_CASE("public specs expose inventory but not ground truth") {
  Scenario s = make_reference_scenario();
  const LineSystem& line = s.line("longhaul");
  PublicLineSpecs specs = public_specs(line, s.grid(line.grid_id));
  CHECK(specs.ila_count == 4);
  CHECK(specs.span_beta2_ps2_km.size() == 5);
  CHECK(specs.amp_gain_range_db.size() == 6);
  CHECK(specs.measurement_slots[0] == 0);
  CHECK(specs.measurement_slots[1] == 47);
}

TEST_CASE("channel plan geometry") {
  SpectrumGrid g = testfix::default_grid();
  ChannelPlan plan = make_comb_plan(g, -10.0);
  CHECK(plan.channels.size() == 46);
  CHECK(plan.at_slot(0) == nullptr);
  CHECK(plan.at_slot(47) == nullptr);
  REQUIRE(plan.at_slot(24) != nullptr);
  CHECK(plan.at_slot(24)->role == ChannelRole::Dummy);

  Channel wide;
  wide.slot_index = 3;
  wide.width_slots = 2;
  CHECK(wide.center_freq_hz(g) == Approx(thz_to_hz(191.35) + 3.5 * 100e9));
}
