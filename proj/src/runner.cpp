#include "dipmem/runner.hpp"

#include "dipmem/control.hpp"
#include "dipmem/effective.hpp"
#include "dipmem/errors.hpp"
#include "dipmem/parallel.hpp"
#include "dipmem/units.hpp"

#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <sstream>

namespace dipmem {

using nlohmann::json;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

CsvTable envelope_table(const FieldEnvelope& e) {
  CsvTable t{{"t_s", "re", "im"}, {}};
  for (std::size_t k = 0; k < e.size(); ++k) t.rows.push_back({e.grid().time(k), e[k].real(), e[k].imag()});
  return t;
}

CsvTable schedule_table(const Schedule& g) {
  CsvTable t{{"time_s", "value"}, {}};
  for (const auto& seg : g.segments())
    if (const auto* tab = std::get_if<Tabulated>(&seg))
      for (std::size_t i = 0; i < tab->times.size(); ++i) t.rows.push_back({tab->times[i], tab->values[i]});
  return t;
}

double tau_of(const Schedule& g, double kappa, const TimeGrid& grid) {
  return g.empty() ? 0.0 : effective_time(g, kappa, grid).total();
}

FieldEnvelope csv_input(const Scenario& s, const TimeGrid& grid) {
  std::filesystem::path p = s.input.path;
  if (p.is_relative()) p = s.base_dir / p;
  const CsvTable t = read_csv(p);
  const std::size_t ct = t.column("time_s"), cr = t.column("re"), ci = t.column("im");
  if (t.rows.size() < 2) throw IoError(fmt::format("{}: input CSV needs at least 2 rows", p.string()));
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (!(t.rows[i][ct] > t.rows[i - 1][ct]))
      throw IoError(fmt::format("{}: time_s must be strictly increasing (row {})", p.string(), i + 1));
  std::vector<cplx> s_out(grid.size(), 0.0);
  std::size_t r = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t0 = grid.time(k);
    if (t0 < t.rows.front()[ct] || t0 > t.rows.back()[ct]) continue;
    while (r + 2 < t.rows.size() && t.rows[r + 1][ct] < t0) ++r;
    const auto& a = t.rows[r];
    const auto& b = t.rows[r + 1];
    const double f = std::clamp((t0 - a[ct]) / (b[ct] - a[ct]), 0.0, 1.0);
    s_out[k] = cplx(a[cr] + f * (b[cr] - a[cr]), a[ci] + f * (b[ci] - a[ci]));
  }
  return FieldEnvelope(grid, std::move(s_out));
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot write {}", path.string()));
  f << j.dump(2) << "\n";
}

bool wanted(const Scenario& s, const std::string& file) {
  return s.outputs.empty() || std::find(s.outputs.begin(), s.outputs.end(), file) != s.outputs.end();
}

RunRecord persist(const Scenario& s, const RunArtifacts& a, double wall, const std::filesystem::path& dir,
                  bool filter) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  RunRecord rec{scenario_hash(s), toolkit_version(), wall, a.summary, a.diagnostics};
  for (const auto& [name, table] : a.tables)
    if (!filter || wanted(s, name)) write_csv(dir / name, table);
  json result = rec.to_json();
  result["scenario"] = to_json(s);
  write_json(dir / "result.json", result);
  return rec;
}

template <class F>
auto timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto out = f();
  return std::make_pair(std::move(out), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

RunArtifacts execute_cavity(const Scenario& s) {
  const TimeGrid grid = s.time_grid();
  const Schedule g = s.coupling();
  const FieldEnvelope e_in = build_input(s, grid);
  SimOptions opt;
  opt.initial.sigma = s.initial_sigma;
  const SimResult r = s.model == ModelKind::cavity_full ? simulate_full(e_in, g, s.delta, s.cavity, opt)
                                                        : simulate_adiabatic(e_in, g, s.delta, s.cavity, opt);
  const auto& L = r.ledger;
  const double tau_w = tau_of(s.g_write, s.cavity.kappa, grid);
  const double tau_r = s.g_read.empty() ? 0.0 : tau_of(s.g_read.shifted(s.storage_time), s.cavity.kappa, grid);

  RunArtifacts a;
  a.summary = {{"model", to_string(s.model)},
               {"eta_w", opt_json(L.eta_w)},
               {"eta_r", opt_json(L.eta_r)},
               {"eta_tot", L.input_energy > 0.0 ? json(L.eta_tot.value_or(0.0)) : json(nullptr)},
               {"input_energy", L.input_energy},
               {"output_energy", L.output_energy},
               {"leakage", L.leakage},
               {"decay_loss_write", L.decay_loss_write},
               {"emitted_read", L.emitted_read},
               {"tau_w", tau_w},
               {"tau_r", tau_r},
               {"eta_w_bound", 1.0 - std::exp(-2.0 * tau_w)},
               {"eta_r_bound", 1.0 - std::exp(-2.0 * tau_r)}};
  a.diagnostics = {{"continuity_residual", r.continuity_residual},
                   {"normalization_drift", s.input.normalize && L.input_energy > 0.0
                                               ? std::abs(L.input_energy - 1.0)
                                               : 0.0},
                   {"residual_cavity", L.residual_cavity}};
  a.tables["e_out.csv"] = envelope_table(r.e_out);
  CsvTable sw{{"t_s", "sigma_re", "sigma_im", "excitation"}, {}};
  for (std::size_t k = 0; k < grid.size(); ++k)
    sw.rows.push_back({grid.time(k), r.sigma[k].real(), r.sigma[k].imag(), r.excitation[k]});
  a.tables["spinwave.csv"] = std::move(sw);
  return a;
}

RunArtifacts execute_freespace(const Scenario& s) {
  const FreeSpaceSpec& f = *s.freespace;
  const MemoryRun m = run_memory(f.scenario, f.optical_depth, f.backward, false,
                                 s.model == ModelKind::freespace_analytic);
  RunArtifacts a;
  a.summary = {{"model", to_string(s.model)},
               {"optical_depth", f.optical_depth},
               {"direction", f.backward ? "backward" : "forward"},
               {"eta_w", m.eta_write},
               {"eta_tot", m.eta},
               {"input_energy", m.write.ledger.input_energy},
               {"leakage", m.write.ledger.output_energy / m.write.ledger.input_energy},
               {"decay_loss_write", m.write.ledger.decay_loss / m.write.ledger.input_energy},
               {"decay_loss_read", m.read.ledger.decay_loss / m.write.ledger.input_energy},
               {"tau_l_write", m.write.tau.back() * m.write.length},
               {"nz", m.write.nz},
               {"dt", m.write.grid.dt()}};
  a.diagnostics = {{"balance_residual_write", m.write.ledger.balance_residual},
                   {"balance_residual_read", m.read.ledger.balance_residual},
                   {"normalization_drift", std::abs(m.write.ledger.input_energy - 1.0)}};
  a.tables["e_out.csv"] = envelope_table(m.read.e_out);
  const SpinWave sw = m.write.final_spin_wave();
  CsvTable t{{"z_m", "re", "im"}, {}};
  for (std::size_t j = 0; j < sw.size(); ++j) t.rows.push_back({sw.z(j), sw.samples[j].real(), sw.samples[j].imag()});
  a.tables["spinwave.csv"] = std::move(t);
  return a;
}

}  // namespace

const char* toolkit_version() { return DIPMEM_VERSION; }

json RunRecord::to_json() const {
  return {{"scenario_hash", scenario_hash},
          {"version", version},
          {"wall_time_s", wall_time_s},
          {"summary", summary},
          {"diagnostics", diagnostics}};
}

FieldEnvelope build_input(const Scenario& s, const TimeGrid& grid) {
  const InputSpec& in = s.input;
  FieldEnvelope e = FieldEnvelope::zeros(grid);
  if (in.kind == "none") return e;
  if (in.kind == "optimal-write") {
    if (s.g_write.empty()) throw ConfigError("optimal-write input needs schedules.g_write", "input.kind");
    if (in.variational) return variational_optimize(s.g_write, s.delta, s.cavity, grid);
    e = optimal_write_input(s.g_write, s.cavity, grid);
  } else if (in.kind == "gaussian") {
    const double w = in.fwtm / (2.0 * std::sqrt(2.0 * std::log(10.0)));
    std::vector<cplx> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double x = (grid.time(k) - in.center) / w;
      v[k] = std::exp(-0.5 * x * x);
    }
    e = FieldEnvelope(grid, std::move(v));
  } else if (in.kind == "square") {
    const double a = std::ceil((in.start - grid.t0()) / grid.dt() - 1e-9);
    const double b = std::floor((in.end - grid.t0()) / grid.dt() + 1e-9);
    if (a < 0.0 || b > static_cast<double>(grid.size() - 1) || b <= a)
      throw ConfigError("square input does not fit on the grid", "input");
    std::vector<cplx> v(grid.size(), 1.0);
    e = FieldEnvelope(grid, std::move(v), static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  } else if (in.kind == "csv") {
    e = csv_input(s, grid);
  }
  if (in.normalize) {
    if (e.is_zero()) throw ConfigError("input field is zero on the grid and cannot be normalised", "input");
    e = e.normalized();
  }
  if (in.compensate_detuning && !s.delta.empty()) {
    const double t_ref = s.g_write.empty() ? grid.t_end() : coupling_window(s.g_write, grid).t_end;
    e = compensate_detuning(e, s.delta, t_ref);
  }
  return e;
}

RunArtifacts execute(const Scenario& s) {
  return is_freespace(s.model) ? execute_freespace(s) : execute_cavity(s);
}

RunArtifacts execute_design(const Scenario& s) {
  if (!s.design) throw ConfigError("design: section is required for the design command", "design");
  if (is_freespace(s.model)) throw ConfigError("design: only cavity models are supported", "model");
  if (s.input.kind == "none" || s.input.kind == "optimal-write")
    throw ConfigError("design: the input must describe the target pulse shape (gaussian, square or csv)",
                      "input.kind");
  if (!(s.storage_time > 0.0)) throw ConfigError("design: storage_time must be positive", "storage_time");
  const TimeGrid grid = s.time_grid();
  const FieldEnvelope e_in = build_input(s, grid);
  const CouplingPair pair = synthesize_couplings(e_in, s.storage_time, s.design->eta_w, s.design->eta_r, s.cavity);

  const auto& read_seg = std::get<Tabulated>(pair.read.segments().front());
  if (read_seg.times.back() > grid.t_end())
    throw ConfigError(fmt::format("grid ends at {} s but the read coupling runs to {} s; extend the grid",
                                  grid.t_end(), read_seg.times.back()),
                      "grid");
  const Schedule g = Schedule::concat(pair.write, pair.read);
  const SimResult r = simulate_adiabatic(e_in, g, Schedule(std::vector<Segment>{}, ScheduleRole::detuning), s.cavity);

  // target: the input delayed by T, compared on the read window only
  const std::size_t first_read = grid.nearest(read_seg.times.front());
  std::vector<cplx> target(grid.size(), 0.0), got(grid.size(), 0.0);
  for (std::size_t k = first_read; k < grid.size(); ++k) {
    const double x = (grid.time(k) - s.storage_time - grid.t0()) / grid.dt();
    if (x < 0.0 || x > static_cast<double>(grid.size() - 1)) continue;
    const auto k0 = std::min(static_cast<std::size_t>(x), grid.size() - 2);
    const double f = x - static_cast<double>(k0);
    target[k] = e_in[k0] + f * (e_in[k0 + 1] - e_in[k0]);
    got[k] = r.e_out[k];
  }
  const FieldEnvelope tgt(grid, target), out(grid, got);
  const double shape = overlap(tgt, out);
  const double energy_ratio = out.norm() / r.ledger.input_energy;
  const double tau_w = tau_of(pair.write, s.cavity.kappa, grid);

  RunArtifacts a;
  a.summary = {{"model", "cavity-adiabatic"},
               {"eta_w_target", s.design->eta_w},
               {"eta_r_target", s.design->eta_r},
               {"eta_w", opt_json(r.ledger.eta_w)},
               {"eta_r", opt_json(r.ledger.eta_r)},
               {"energy_ratio", energy_ratio},
               {"shape_overlap", shape},
               {"tau_w", tau_w},
               {"eta_w_from_tau", 1.0 - std::exp(-2.0 * tau_w)}};
  a.diagnostics = {{"continuity_residual", r.continuity_residual},
                   {"normalization_drift", std::abs(r.ledger.input_energy - 1.0)}};
  a.tables["g_write.csv"] = schedule_table(pair.write);
  a.tables["g_read.csv"] = schedule_table(pair.read);
  a.tables["e_out.csv"] = envelope_table(r.e_out);
  return a;
}

SweepAxis parse_axis(const std::string& name) {
  for (SweepAxis a : {SweepAxis::optical_depth, SweepAxis::cooperativity, SweepAxis::tau_w, SweepAxis::tau_r,
                      SweepAxis::pulse_duration})
    if (name == to_string(a)) return a;
  throw ParameterError(fmt::format(
      "unknown sweep axis '{}' (optical-depth, cooperativity, tau_w, tau_r, pulse-duration)", name));
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::optical_depth: return "optical-depth";
    case SweepAxis::cooperativity: return "cooperativity";
    case SweepAxis::tau_w: return "tau_w";
    case SweepAxis::tau_r: return "tau_r";
    case SweepAxis::pulse_duration: return "pulse-duration";
  }
  return "?";
}

std::vector<double> parse_values(const std::string& list, SweepAxis axis) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  const Dimension dim = axis == SweepAxis::pulse_duration ? Dimension::time : Dimension::dimensionless;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos)
      throw ParameterError(fmt::format("--values: empty entry in '{}'", list));
    try {
      out.push_back(parse_quantity(item, dim, "--values"));
    } catch (const ConfigError& e) {
      throw ParameterError(e.what());
    }
  }
  if (out.empty()) throw ParameterError("--values: the value list is empty");
  return out;
}

CsvTable sweep_table(const Scenario& s, SweepAxis axis, const std::vector<double>& values, unsigned workers) {
  if (values.empty()) throw ParameterError("sweep value list is empty");
  if (axis == SweepAxis::optical_depth) {
    if (!s.freespace) throw ParameterError("the optical-depth axis needs a free-space scenario");
    const auto rows = storage_retrieval_sweep(s.freespace->scenario, values, workers);
    CsvTable t{{"d", "eta_forward", "eta_backward"}, {}};
    for (const auto& r : rows) t.rows.push_back({r.d, r.eta_forward, r.eta_backward});
    return t;
  }
  if (s.freespace) {
    if (axis != SweepAxis::pulse_duration)
      throw ParameterError(fmt::format("axis {} applies to cavity scenarios only", to_string(axis)));
    const auto rows = parallel_map<std::vector<double>>(values.size(), workers, [&](std::size_t i) {
      Scenario v = s;
      v.freespace->scenario.pulse_fwtm = values[i];
      const RunArtifacts a = execute(v);
      return std::vector<double>{values[i], a.summary["eta_w"].get<double>(), a.summary["eta_tot"].get<double>()};
    });
    return CsvTable{{"pulse_fwtm_s", "eta_w", "eta_tot"}, rows};
  }

  const TimeGrid grid = s.time_grid();
  const double tau_w0 = tau_of(s.g_write, s.cavity.kappa, grid);
  const double tau_r0 = s.g_read.empty() ? 0.0 : tau_of(s.g_read.shifted(s.storage_time), s.cavity.kappa, grid);
  auto variant = [&](double v) {
    Scenario c = s;
    switch (axis) {
      case SweepAxis::cooperativity: {
        if (!(v > 0.0)) throw ParameterError("cooperativity values must be positive");
        const double g0 = std::max(s.g_write.peak(), s.g_read.peak());
        if (!(g0 > 0.0)) throw ParameterError("cooperativity sweep needs a nonzero coupling");
        c.cavity.gamma = g0 * g0 / (s.cavity.kappa * v);
        break;
      }
      case SweepAxis::tau_w:
        if (!(tau_w0 > 0.0)) throw ParameterError("tau_w sweep needs a nonzero g_write");
        if (!(v >= 0.0)) throw ParameterError("tau_w values must be non-negative");
        c.g_write = s.g_write.scaled(std::sqrt(v / tau_w0));
        break;
      case SweepAxis::tau_r:
        if (!(tau_r0 > 0.0)) throw ParameterError("tau_r sweep needs a nonzero g_read");
        if (!(v >= 0.0)) throw ParameterError("tau_r values must be non-negative");
        c.g_read = s.g_read.scaled(std::sqrt(v / tau_r0));
        break;
      case SweepAxis::pulse_duration:
        if (c.input.kind != "gaussian") throw ParameterError("pulse-duration sweep needs a gaussian input");
        if (!(v > 0.0)) throw ParameterError("pulse durations must be positive");
        c.input.fwtm = v;
        break;
      case SweepAxis::optical_depth: break;
    }
    return c;
  };
  const auto rows = parallel_map<std::vector<double>>(values.size(), workers, [&](std::size_t i) {
    const RunArtifacts a = execute(variant(values[i]));
    auto num = [&](const char* k) { return a.summary[k].is_null() ? nan : a.summary[k].get<double>(); };
    return std::vector<double>{values[i],     num("eta_w"),  num("eta_r"),
                               num("eta_tot"), num("leakage"), num("decay_loss_write"),
                               a.diagnostics["continuity_residual"].get<double>()};
  });
  return CsvTable{{to_string(axis), "eta_w", "eta_r", "eta_tot", "leakage", "decay_loss_write", "continuity_residual"},
                  rows};
}

RunRecord run(const Scenario& s, const std::filesystem::path& out_dir) {
  auto [a, wall] = timed([&] { return execute(s); });
  return persist(s, a, wall, out_dir, true);
}

RunRecord design(const Scenario& s, const std::filesystem::path& out_dir) {
  auto [a, wall] = timed([&] { return execute_design(s); });
  return persist(s, a, wall, out_dir, false);
}

RunRecord sweep(const Scenario& s, SweepAxis axis, const std::vector<double>& values,
                const std::filesystem::path& out_dir, unsigned workers) {
  auto [t, wall] = timed([&] { return sweep_table(s, axis, values, workers); });
  RunArtifacts a;
  a.summary = {{"axis", to_string(axis)}, {"rows", t.rows.size()}};
  a.diagnostics = json::object();
  a.tables["sweep.csv"] = std::move(t);
  return persist(s, a, wall, out_dir, false);
}

}  // namespace dipmem
