#include "dipmem/cli.hpp"

#include "dipmem/errors.hpp"
#include "dipmem/runner.hpp"
#include "dipmem/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <ostream>

namespace dipmem {

namespace {

enum ExitCode { ok = 0, failed_checks = 1, usage = 2, model_error = 3, config_error = 4, io_error = 5 };

void emit_error(std::ostream& err, const nlohmann::json& j) { err << j.dump() << "\n"; }

int error_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::config: return config_error;
    case ErrorKind::io: return io_error;
    default: return model_error;
  }
}

nlohmann::json error_json(const Error& e) {
  nlohmann::json j{{"error", to_string(e.kind())}, {"message", e.what()}};
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    j["field"] = c->field;
    if (c->line > 0) j["line"] = c->line;
  } else if (const auto* s = dynamic_cast<const SingularTransformError*>(&e)) {
    j["time_s"] = s->time;
  } else if (const auto* v = dynamic_cast<const ConvergenceError*>(&e)) {
    j["residual"] = v->residual;
  }
  return j;
}

std::filesystem::path out_dir_for(const std::string& given, const Scenario& s) {
  return given.empty() ? std::filesystem::path("runs") / s.name : std::filesystem::path(given);
}

void print_record(std::ostream& out, const RunRecord& rec, const std::filesystem::path& dir) {
  nlohmann::json j = rec.to_json();
  j["out_dir"] = dir.string();
  out << j.dump(2) << "\n";
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum memory simulator with switchable dipole coupling", "dipmem"};
  app.set_version_flag("--version", toolkit_version());
  app.require_subcommand(1);

  std::string config, out_dir, axis_name, values;
  unsigned workers = 0;

  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write result.json, e_out.csv, spinwave.csv");
  run_cmd->add_option("config", config, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (default runs/<name>)");

  auto* design_cmd = app.add_subcommand("design", "Synthesise write/read couplings for a target pulse");
  design_cmd->add_option("config", config, "Scenario JSON file with a design section")->required();
  design_cmd->add_option("--out", out_dir, "Output directory (default runs/<name>)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a scenario over a list of values and write sweep.csv");
  sweep_cmd->add_option("config", config, "Scenario JSON file")->required();
  sweep_cmd->add_option("--axis", axis_name, "optical-depth | cooperativity | tau_w | tau_r | pulse-duration")
      ->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values, e.g. 0.5,1,2 or 100ns,200ns")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory (default runs/<name>)");
  sweep_cmd->add_option("--workers", workers, "Worker threads (0: all cores)");

  auto* verify_cmd = app.add_subcommand("verify", "Run the built-in invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForVersion&) {
    out << toolkit_version() << "\n";
    return ok;
  } catch (const CLI::ParseError& e) {
    emit_error(err, {{"error", "usage"}, {"message", e.what()}});
    return usage;
  }

  try {
    if (verify_cmd->parsed()) return report(run_invariant_suite(), out) ? ok : failed_checks;

    const Scenario s = load_scenario(config);
    const auto dir = out_dir_for(out_dir, s);
    if (run_cmd->parsed()) {
      print_record(out, run(s, dir), dir);
    } else if (design_cmd->parsed()) {
      print_record(out, design(s, dir), dir);
    } else {
      const SweepAxis axis = parse_axis(axis_name);
      print_record(out, sweep(s, axis, parse_values(values, axis), dir, workers), dir);
    }
    return ok;
  } catch (const Error& e) {
    emit_error(err, error_json(e));
    return error_code(e);
  } catch (const std::exception& e) {
    emit_error(err, {{"error", "internal"}, {"message", e.what()}});
    return model_error;
  }
}

}  // namespace dipmem
