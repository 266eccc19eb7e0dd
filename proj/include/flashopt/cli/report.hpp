#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace flashopt::cli {

enum class Format { text, csv, structured };

Format format_from_name(const std::string& name);

inline constexpr const char* kVersion = "0.1.0";

struct RunReport {
  std::string command;     // argv echo, program name excluded
  nlohmann::json config;   // effective settings; hashed
  std::string scenario_hash;
  nlohmann::json results;
  nlohmann::json timing = nlohmann::json::object();  // seconds; never hashed or pinned
  std::vector<std::string> notes;
  int exit_code = 0;

  // Pre-rendered human forms, filled by the command.
  std::string text;
  std::string csv;

  std::string config_hash() const;
  nlohmann::json to_json() const;
  std::string render(Format format) const;
};

nlohmann::json versions();

// Same report without the timing block, for golden comparison.
nlohmann::json without_timing(nlohmann::json report);

// Fixed-point number for the text tables.
std::string fixed(double value, int digits = 4);

}  // namespace flashopt::cli
