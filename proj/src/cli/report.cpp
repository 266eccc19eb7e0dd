#include "flashopt/cli/report.hpp"

#include <Eigen/Core>
#include <iomanip>
#include <sstream>

#include "flashopt/common.hpp"

namespace flashopt::cli {

using nlohmann::json;

Format format_from_name(const std::string& name) {
  if (name == "text") return Format::text;
  if (name == "csv") return Format::csv;
  if (name == "structured") return Format::structured;
  throw UsageError("unknown format '" + name + "' (text, csv, structured)");
}

json versions() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  std::ostringstream js;
  js << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
     << NLOHMANN_JSON_VERSION_PATCH;
  return {{"flashopt", kVersion}, {"eigen", eigen.str()}, {"json", js.str()}};
}

std::string RunReport::config_hash() const { return hex64(fnv1a64(config.dump())); }

json RunReport::to_json() const {
  json j;
  j["command"] = command;
  j["config"] = config;
  j["config_hash"] = config_hash();
  j["scenario_hash"] = scenario_hash;
  j["results"] = results;
  j["notes"] = notes;
  j["exit_code"] = exit_code;
  j["versions"] = versions();
  j["timing"] = timing;
  return j;
}

json without_timing(json report) {
  report.erase("timing");
  return report;
}

std::string RunReport::render(Format format) const {
  switch (format) {
    case Format::structured: return to_json().dump(2) + "\n";
    case Format::csv: return csv;
    case Format::text: break;
  }
  std::ostringstream out;
  out << text;
  for (const auto& n : notes) out << "note: " << n << '\n';
  out << "config " << config_hash();
  if (!scenario_hash.empty()) out << "  scenario " << scenario_hash;
  out << '\n';
  return out.str();
}

std::string fixed(double value, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << value;
  return s.str();
}

}  // namespace flashopt::cli
