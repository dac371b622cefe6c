#pragma once

#include "dipmem/cavity.hpp"
#include "dipmem/freespace.hpp"
#include "dipmem/schedule.hpp"

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace dipmem {

enum class ModelKind { cavity_full, cavity_adiabatic, freespace_analytic, freespace_numeric };

const char* to_string(ModelKind m);
bool is_freespace(ModelKind m);

struct GridSpec {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t n = 0;

  TimeGrid grid() const { return TimeGrid(t0, dt, n); }
};

/// How the input field is produced. Kinds: none, optimal-write, gaussian,
/// square, csv.
struct InputSpec {
  std::string kind = "none";
  double center = 0.0;      // gaussian
  double fwtm = 0.0;        // gaussian, amplitude full width at tenth maximum
  double start = 0.0;       // square
  double end = 0.0;         // square
  std::string path;         // csv: columns time_s, re, im
  bool variational = false; // optimal-write: use the numerical optimiser
  bool compensate_detuning = false;
  bool normalize = true;

  bool operator==(const InputSpec&) const = default;
};

struct DesignSpec {
  double eta_w = 0.0;
  double eta_r = 0.0;
};

struct FreeSpaceSpec {
  FreeSpaceScenario scenario;
  double optical_depth = 0.0;
  bool backward = true;
};

struct Scenario {
  std::string name = "scenario";
  ModelKind model = ModelKind::cavity_adiabatic;
  CavityParams cavity;
  std::optional<GridSpec> grid;
  Schedule g_write;
  /// Read coupling; its times are offset by storage_time when the full
  /// coupling is assembled.
  Schedule g_read;
  Schedule delta{{}, ScheduleRole::detuning};
  double storage_time = 0.0;
  InputSpec input;
  cplx initial_sigma = 0.0;
  std::optional<FreeSpaceSpec> freespace;
  std::optional<DesignSpec> design;
  std::vector<std::string> outputs;

  /// Directory that relative CSV paths are resolved against (not serialized).
  std::filesystem::path base_dir;

  /// g_write followed by g_read shifted by storage_time.
  Schedule coupling() const;
  TimeGrid time_grid() const;
};

/// Parses config text. Errors are ConfigError with the JSON path of the
/// offending field and the line it appears on.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON: SI units, tabulated data inline, sorted keys.
nlohmann::json to_json(const Scenario& s);
std::string canonical_text(const Scenario& s);
/// Hex SHA-256 of canonical_text.
std::string scenario_hash(const Scenario& s);

}  // namespace dipmem
