#pragma once

#include "dipmem/csv.hpp"
#include "dipmem/scenario.hpp"

#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

namespace dipmem {

/// What one execution produced, before anything touches the disk.
struct RunArtifacts {
  nlohmann::json summary;
  nlohmann::json diagnostics;
  /// File name -> table (e_out.csv, spinwave.csv, g_write.csv, ...).
  std::map<std::string, CsvTable> tables;
};

struct RunRecord {
  std::string scenario_hash;
  std::string version;
  double wall_time_s = 0.0;
  nlohmann::json summary;
  nlohmann::json diagnostics;

  nlohmann::json to_json() const;
};

const char* toolkit_version();

/// Input envelope described by the scenario, on `grid`.
FieldEnvelope build_input(const Scenario& s, const TimeGrid& grid);

RunArtifacts execute(const Scenario& s);
RunArtifacts execute_design(const Scenario& s);

enum class SweepAxis { optical_depth, cooperativity, tau_w, tau_r, pulse_duration };
SweepAxis parse_axis(const std::string& name);
const char* to_string(SweepAxis axis);
/// Parses a comma-separated value list; pulse durations need a time unit.
std::vector<double> parse_values(const std::string& list, SweepAxis axis);

/// One row per value, computed on `workers` threads, in input order.
CsvTable sweep_table(const Scenario& s, SweepAxis axis, const std::vector<double>& values, unsigned workers = 0);

/// The same three operations with artifacts written to out_dir (created if
/// needed): result.json plus the CSV tables.
RunRecord run(const Scenario& s, const std::filesystem::path& out_dir);
RunRecord design(const Scenario& s, const std::filesystem::path& out_dir);
RunRecord sweep(const Scenario& s, SweepAxis axis, const std::vector<double>& values,
                const std::filesystem::path& out_dir, unsigned workers = 0);

}  // namespace dipmem
