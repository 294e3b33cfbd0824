#include "optwin/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "optwin/json_io.hpp"
#include "optwin/log.hpp"
#include "serial.hpp"

namespace optwin::report {

using nlohmann::json;

namespace {

json report_json(const orchestrator::RecoveryReport& r) {
  json j;
  j["seed"] = r.seed;
  j["line_id"] = r.scenario_line_id;
  j["outcome"] = orchestrator::outcome_name(r.outcome);
  j["failing_step"] = r.failing_step.empty() ? json(nullptr) : json(r.failing_step);
  j["failure_detail"] = r.failure_detail.empty() ? json(nullptr) : json(r.failure_detail);
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(serial::step_to_json(s));
  j["steps"] = steps;
  j["total_duration_min"] = r.total_duration_min;
  j["total_duration_hours"] = r.total_duration_min / 60.0;
  j["fuel_deadline_hours"] = r.fuel_deadline_hours;
  j["lease_id"] = r.lease_id;
  json trx = json::array();
  for (const auto& t : r.trx_estimates) trx.push_back(serial::trx_to_json(t));
  j["estimates"] = json::object();
  j["estimates"]["transceivers"] = trx;
  j["estimates"]["link"] =
      r.link_estimate ? serial::link_to_json(*r.link_estimate) : json(nullptr);
  j["estimates"]["ols"] =
      r.ols_estimate ? serial::ols_to_json(*r.ols_estimate) : json(nullptr);
  if (r.optimization) {
    j["optimization"] = {{"objective_db", r.optimization->objective_db},
                         {"iterations", r.optimization->iterations},
                         {"flatness_before_db", r.optimization->flatness_before_db},
                         {"flatness_after_db", r.optimization->flatness_after_db},
                         {"min_gsnr_db", r.optimization->min_gsnr_db},
                         {"launch_offset_db", r.optimization->launch_offset_db},
                         {"launch_tilt_db", r.optimization->launch_tilt_db}};
  } else {
    j["optimization"] = nullptr;
  }
  json paths = json::array();
  for (const auto& v : r.lightpaths) paths.push_back(serial::outcome_to_json(v));
  j["lightpaths"] = paths;
  j["migration"] = r.migration ? serial::migration_to_json(*r.migration) : json(nullptr);
  j["figures"] = serial::figures_to_json(r.figures);
  return j;
}

std::string num(double v) { return format_number(v); }

void write_svg_polyline(const std::string& path, const std::string& title,
                        const std::vector<std::vector<std::pair<double, double>>>& series) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double w = 800, h = 400, m = 50;
  auto sx = [&](double x) { return m + (x - xmin) / (xmax - xmin) * (w - 2 * m); };
  auto sy = [&](double y) { return h - m - (y - ymin) / (ymax - ymin) * (h - 2 * m); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" +
         num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         title + "</text>\n";
  out += "<line x1=\"" + num(m) + "\" y1=\"" + num(h - m) + "\" x2=\"" + num(w - m) +
         "\" y2=\"" + num(h - m) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(m) + "\" y1=\"" + num(m) + "\" x2=\"" + num(m) + "\" y2=\"" +
         num(h - m) + "\" stroke=\"black\"/>\n";
  for (size_t si = 0; si < series.size(); ++si) {
    if (series[si].empty()) continue;
    out += "<polyline fill=\"none\" stroke=\"";
    out += colors[si % 4];
    out += "\" stroke-width=\"1.2\" points=\"";
    for (const auto& [x, y] : series[si]) {
      out += num(sx(x)) + "," + num(sy(y)) + " ";
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  write_text_file(path, out);
}

int emit_from_figures(const orchestrator::FigureData& f, const std::string& out_dir,
                      bool svg) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  int warnings = 0;

  if (!f.launch_power.empty()) {
    std::string csv = csv_line({"slot_index", "frequency_thz", "launch_power_dbm"});
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : f.launch_power) {
      csv += csv_line({std::to_string(r.slot_index), num(r.frequency_thz),
                       num(r.launch_power_dbm)});
      pts.push_back({r.frequency_thz, r.launch_power_dbm});
    }
    write_text_file(out_dir + "/launch_power.csv", csv);
    if (svg) {
      write_svg_polyline(out_dir + "/launch_power.svg",
                         "Optimized launch power before booster (dBm vs THz)", {pts});
    }
  } else {
    log_info("skipping launch_power.csv: no optimization section in the report");
    ++warnings;
  }

  if (!f.accumulated_gsnr.empty()) {
    std::string csv = csv_line({"slot_index", "frequency_thz", "point_index",
                                "element_id", "gsnr_db", "snr_ase_db", "snr_nli_db"});
    for (const auto& r : f.accumulated_gsnr) {
      csv += csv_line({std::to_string(r.slot_index), num(r.frequency_thz),
                       std::to_string(r.point_index), r.element_id, num(r.gsnr_db),
                       num(r.snr_ase_db), num(r.snr_nli_db)});
    }
    write_text_file(out_dir + "/accumulated_gsnr.csv", csv);
    if (svg) {
      // one trace per amplifier output across frequency
      std::map<int, std::vector<std::pair<double, double>>> traces;
      for (const auto& r : f.accumulated_gsnr) {
        traces[r.point_index].push_back({r.frequency_thz, r.gsnr_db});
      }
      std::vector<std::vector<std::pair<double, double>>> series;
      for (auto& [k, v] : traces) series.push_back(std::move(v));
      write_svg_polyline(out_dir + "/accumulated_gsnr.svg",
                         "Accumulated GSNR after each amplifier (dB vs THz)", series);
    }
  } else {
    log_info("skipping accumulated_gsnr.csv: no optimization section in the report");
    ++warnings;
  }

  if (!f.dlm_position_km.empty() && f.dlm_before_dbm.size() == f.dlm_position_km.size() &&
      f.dlm_after_dbm.size() == f.dlm_position_km.size()) {
    std::string csv = csv_line({"position_km", "power_dbm_before", "power_dbm_after"});
    std::vector<std::pair<double, double>> before, after;
    for (size_t i = 0; i < f.dlm_position_km.size(); ++i) {
      csv += csv_line({num(f.dlm_position_km[i]), num(f.dlm_before_dbm[i]),
                       num(f.dlm_after_dbm[i])});
      before.push_back({f.dlm_position_km[i], f.dlm_before_dbm[i]});
      after.push_back({f.dlm_position_km[i], f.dlm_after_dbm[i]});
    }
    write_text_file(out_dir + "/dlm_profile_before_after.csv", csv);
    if (svg) {
      write_svg_polyline(out_dir + "/dlm_profile_before_after.svg",
                         "Longitudinal power profile before/after optimization",
                         {before, after});
    }
  } else {
    log_info("skipping dlm_profile_before_after.csv: no validated profile pair");
    ++warnings;
  }

  if (!f.received_spectrum.empty()) {
    std::string csv = csv_line({"slot_index", "frequency_thz", "power_dbm", "role"});
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : f.received_spectrum) {
      csv += csv_line({std::to_string(r.slot_index), num(r.frequency_thz),
                       num(r.power_dbm), r.role});
      pts.push_back({r.frequency_thz, r.power_dbm});
    }
    write_text_file(out_dir + "/received_spectrum.csv", csv);
    if (svg) {
      write_svg_polyline(out_dir + "/received_spectrum.svg",
                         "Received WDM spectrum after provisioning (dBm vs THz)", {pts});
    }
  } else {
    log_info("skipping received_spectrum.csv: lightpaths were not provisioned");
    ++warnings;
  }
  return warnings;
}

}  // namespace

std::string report_to_json(const orchestrator::RecoveryReport& r) {
  return canonical_dump(report_json(r));
}

std::string trx_estimates_to_json(const orchestrator::RecoveryReport& r) {
  json arr = json::array();
  for (const auto& t : r.trx_estimates) arr.push_back(serial::trx_to_json(t));
  return canonical_dump(json{{"transceivers", arr}});
}

std::string link_estimate_to_json(const orchestrator::RecoveryReport& r) {
  if (!r.link_estimate) raise(ErrorKind::Io, "report has no link estimate");
  return canonical_dump(serial::link_to_json(*r.link_estimate));
}

std::string ols_estimate_to_json(const orchestrator::RecoveryReport& r) {
  if (!r.ols_estimate) raise(ErrorKind::Io, "report has no calibration estimate");
  return canonical_dump(serial::ols_to_json(*r.ols_estimate));
}

std::string optimization_to_json_text(const orchestrator::RecoveryReport& r,
                                      const qot::LineConfig& config) {
  if (!r.optimization) raise(ErrorKind::Io, "report has no optimization result");
  json j = {{"objective_db", r.optimization->objective_db},
            {"iterations", r.optimization->iterations},
            {"flatness_before_db", r.optimization->flatness_before_db},
            {"flatness_after_db", r.optimization->flatness_after_db},
            {"min_gsnr_db", r.optimization->min_gsnr_db},
            {"launch_offset_db", r.optimization->launch_offset_db},
            {"launch_tilt_db", r.optimization->launch_tilt_db},
            {"config", serial::line_config_to_json(config)}};
  return canonical_dump(j);
}

std::string lightpaths_to_json(const orchestrator::RecoveryReport& r) {
  json arr = json::array();
  for (const auto& v : r.lightpaths) arr.push_back(serial::outcome_to_json(v));
  return canonical_dump(json{{"lightpaths", arr}});
}

int emit_figures(const orchestrator::RecoveryReport& r, const std::string& out_dir,
                 bool svg) {
  return emit_from_figures(r.figures, out_dir, svg);
}

int emit_figures_from_text(const std::string& report_json_text,
                           const std::string& out_dir, bool svg) {
  json j;
  try {
    j = json::parse(report_json_text);
  } catch (const json::exception& e) {
    raise(ErrorKind::Io, std::string("report.json is not valid JSON: ") + e.what());
  }
  orchestrator::FigureData figures = serial::figures_from_json(j.at("figures"));
  return emit_from_figures(figures, out_dir, svg);
}

}  // namespace optwin::report
