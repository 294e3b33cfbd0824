#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace optwin {

// Fixed numeric formatting for every artifact the tool emits: 6 significant
// digits, lowercase scientific notation, -0 normalized. Keeps report.json and
// the CSV figure files byte-identical across runs and platforms.
std::string format_number(double v);

// Canonical serialization: keys sorted (nlohmann object order), numbers via
// format_number. indent <= 0 produces a single compact line (used for the
// audit log and wire messages); positive indents end with a newline.
std::string canonical_dump(const nlohmann::json& j, int indent = 2);

std::string csv_line(const std::vector<std::string>& cells);

void write_text_file(const std::string& path, const std::string& contents);

std::string read_text_file(const std::string& path);

}  // namespace optwin
