// Regenerates the scenario fixtures under scenarios/. Run manually after
// changing the reference scenario defaults:
//   ./build/tests/make_scenarios <repo-root>
#include <iostream>

#include "optwin/json_io.hpp"
#include "optwin/scenario.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_scenarios <repo-root>\n";
    return 1;
  }
  std::string root = argv[1];
  using namespace optwin;

  write_text_file(root + "/scenarios/reference_recovery.json",
                  serialize_scenario(make_reference_scenario()));

  // A line the optimizer cannot rescue: long spans leave little headroom and
  // a 10 dB mid-span loss exceeds what the capped amplifiers can recover.
  ReferenceScenarioOptions stressed;
  stressed.span_count = 4;
  stressed.span_length_km = 80.0;
  stressed.amp_gain_db = 16.0;
  stressed.gain_range_max_db = 18.0;
  stressed.extra_losses = {{1, 40.0, 10.0}};
  write_text_file(root + "/scenarios/unrecoverable_loss.json",
                  serialize_scenario(make_reference_scenario(stressed)));
  std::cout << "scenario fixtures written\n";
  return 0;
}
