// Regenerates the seeded telemetry golden fixtures under tests/golden/. The
// noiseless behavior is pinned against independent closed-form values in the
// unit tests; these files freeze the seeded noise streams.
//   ./build/tests/make_goldens <repo-root>
#include <iostream>
#include <string>

#include "optwin/json_io.hpp"
#include "optwin/telemetry.hpp"
#include "test_fixtures.hpp"

using namespace optwin;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_goldens <repo-root>\n";
    return 1;
  }
  std::string root = argv[1];

  TransceiverPort port;
  port.id = "golden_port";
  port.owner_operator = "op";
  port.node_id = "tx";
  port.supported_format_ids = {"dp16qam_400g"};
  port.snr_trx_true_db = 24.0;
  ModulationFormat fmt{"dp16qam_400g", 4.0, "dp-16qam", 400.0, 63.1};
  std::vector<double> attens;
  for (int a = 0; a <= 20; a += 2) attens.push_back(a);
  telemetry::VoaSweepRecord sweep =
      telemetry::simulate_voa_sweep(port, fmt, attens, 40.0, 0.0, 0.1, 7);
  std::string csv = csv_line({"attenuation_db", "ber", "saturated"});
  for (const auto& p : sweep.points) {
    char ber[40];
    std::snprintf(ber, sizeof(ber), "%.12e", p.ber);
    csv += csv_line({format_number(p.attenuation_db), ber, p.saturated ? "1" : "0"});
  }
  write_text_file(root + "/tests/golden/voa_sweep_seed7.csv", csv);

  SpectrumGrid grid = testfix::default_grid();
  LineSystem line = testfix::make_line(3);
  ChannelPlan plan = testfix::make_plan(grid);
  qot::LineConfig cfg = testfix::make_config(line, plan, -11.2);
  auto readings = telemetry::read_amp_power_monitors(line, grid, cfg, plan, 0.1, 3);
  std::string amps = csv_line({"amp_id", "input_dbm", "output_dbm"});
  for (const auto& r : readings) {
    char in[40], out[40];
    std::snprintf(in, sizeof(in), "%.12f", r.input_dbm);
    std::snprintf(out, sizeof(out), "%.12f", r.output_dbm);
    amps += csv_line({r.amp_id, in, out});
  }
  write_text_file(root + "/tests/golden/amp_readings_seed3.csv", amps);
  std::cout << "telemetry goldens written\n";
  return 0;
}
