#include "dipmem/scenario.hpp"

#include "dipmem/csv.hpp"
#include "dipmem/errors.hpp"
#include "dipmem/units.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <openssl/evp.h>
#include <set>
#include <sstream>

namespace dipmem {

using nlohmann::json;

const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::cavity_full: return "cavity-full";
    case ModelKind::cavity_adiabatic: return "cavity-adiabatic";
    case ModelKind::freespace_analytic: return "freespace-analytic";
    case ModelKind::freespace_numeric: return "freespace-numeric";
  }
  return "?";
}

bool is_freespace(ModelKind m) {
  return m == ModelKind::freespace_analytic || m == ModelKind::freespace_numeric;
}

Schedule Scenario::coupling() const {
  if (g_read.empty()) return g_write;
  return Schedule::concat(g_write, g_read.shifted(storage_time));
}

TimeGrid Scenario::time_grid() const {
  if (!grid) throw ConfigError("grid: required for cavity models", "grid");
  return grid->grid();
}

namespace {

int line_of(const std::string& text, std::size_t pos) {
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

/// Walks the config text key by key to find the line of a field. Array
/// indices are matched by counting object openings.
class Locator {
public:
  explicit Locator(const std::string& text) : text_(text) {}

  int line(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& part : path) {
      if (!part.empty() && part.front() == '[') {
        const std::size_t idx = std::stoul(part.substr(1));
        std::size_t p = text_.find('[', pos);
        for (std::size_t i = 0; p != std::string::npos && i <= idx; ++i) p = text_.find('{', p + 1);
        if (p == std::string::npos) break;
        pos = p;
      } else {
        const auto p = text_.find('"' + part + '"', pos);
        if (p == std::string::npos) break;
        pos = p;
      }
    }
    return line_of(text_, pos);
  }

private:
  const std::string& text_;
};

class Node {
public:
  Node(const json& j, std::vector<std::string> path, const Locator& loc) : j_(j), path_(std::move(path)), loc_(loc) {}

  const json& value() const { return j_; }

  std::string path_text() const {
    std::string s;
    for (const auto& p : path_) {
      if (!s.empty() && p.front() != '[') s += '.';
      s += p;
    }
    return s.empty() ? "<root>" : s;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(fmt::format("{}: {}", path_text(), why), path_text(), loc_.line(path_));
  }

  Node child(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    if (!j_.contains(key)) Node(j_, p, loc_).fail("required field is missing");
    return Node(j_.at(key), p, loc_);
  }
  Node at(std::size_t i) const {
    auto p = path_;
    p.push_back(fmt::format("[{}]", i));
    return Node(j_.at(i), p, loc_);
  }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) child(it.key()).fail("unknown field");
  }

  std::string str() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  double quantity(Dimension dim) const {
    if (dim == Dimension::dimensionless && j_.is_number()) return j_.get<double>();
    if (!j_.is_string()) fail(dim == Dimension::dimensionless ? "expected a number" : "expected a quoted value with a unit");
    try {
      return parse_quantity(j_.get<std::string>(), dim, path_text());
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), path_text(), loc_.line(path_));
    }
  }
  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::size_t count() const {
    if (!j_.is_number_integer() || j_.get<long long>() < 0) fail("expected a non-negative integer");
    return j_.get<std::size_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  double quantity_or(const std::string& key, Dimension dim, double fallback) const {
    return has(key) ? child(key).quantity(dim) : fallback;
  }

private:
  const json& j_;
  std::vector<std::string> path_;
  const Locator& loc_;
};

std::vector<double> quantity_list(const Node& n, const char* key, const char* unit_key, Dimension dim) {
  const Node arr = n.child(key);
  if (!arr.value().is_array()) arr.fail("expected an array");
  double factor = 1.0;
  if (n.has(unit_key)) factor = parse_quantity("1 " + n.child(unit_key).str(), dim, n.child(unit_key).path_text());
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.value().size(); ++i) {
    const Node e = arr.at(i);
    if (e.value().is_number()) {
      if (!n.has(unit_key)) e.fail(fmt::format("bare number needs '{}' on the segment", unit_key));
      out.push_back(e.number() * factor);
    } else {
      out.push_back(e.quantity(dim));
    }
  }
  return out;
}

Segment parse_segment(const Node& n, const std::filesystem::path& base) {
  if (!n.value().is_object()) n.fail("expected a segment object");
  const std::string kind = n.child("kind").str();
  if (kind == "square") {
    n.expect_object({"kind", "start", "end", "amplitude"});
    return SquarePulse{n.child("start").quantity(Dimension::time), n.child("end").quantity(Dimension::time),
                       n.child("amplitude").quantity(Dimension::rate)};
  }
  if (kind == "gaussian") {
    n.expect_object({"kind", "center", "width", "fwtm", "amplitude", "half_span", "start", "end"});
    double width = 0.0;
    if (n.has("width") == n.has("fwtm")) n.fail("give exactly one of 'width' (rms) or 'fwtm'");
    if (n.has("width")) {
      width = n.child("width").quantity(Dimension::time);
    } else {
      width = n.child("fwtm").quantity(Dimension::time) / (2.0 * std::sqrt(2.0 * std::log(10.0)));
    }
    const double center = n.child("center").quantity(Dimension::time);
    const double amplitude = n.child("amplitude").quantity(Dimension::rate);
    if (n.has("half_span")) {
      if (n.has("start") || n.has("end")) n.fail("give either 'half_span' or 'start' and 'end'");
      const double half = n.child("half_span").quantity(Dimension::time);
      return GaussianPulse{center - half, center + half, center, width, amplitude};
    }
    return GaussianPulse{n.child("start").quantity(Dimension::time), n.child("end").quantity(Dimension::time), center,
                         width, amplitude};
  }
  if (kind == "piecewise-linear" || kind == "tabulated") {
    n.expect_object({"kind", "times", "values", "time_unit", "value_unit", "csv"});
    std::vector<double> times, values;
    if (n.has("csv")) {
      if (kind != "tabulated") n.child("csv").fail("only tabulated segments load from CSV");
      std::filesystem::path p = n.child("csv").str();
      if (p.is_relative()) p = base / p;
      try {
        const CsvTable t = read_csv(p);
        if (t.header.size() != 2) n.child("csv").fail("tabulated CSV must have exactly 2 columns (time_s, value)");
        for (const auto& r : t.rows) {
          times.push_back(r[0]);
          values.push_back(r[1]);
        }
      } catch (const IoError& e) {
        n.child("csv").fail(e.what());
      }
    } else {
      times = quantity_list(n, "times", "time_unit", Dimension::time);
      values = quantity_list(n, "values", "value_unit", Dimension::rate);
    }
    if (kind == "tabulated") return Tabulated{std::move(times), std::move(values)};
    return PiecewiseLinear{std::move(times), std::move(values)};
  }
  n.child("kind").fail(fmt::format("unknown segment kind '{}' (square, gaussian, piecewise-linear, tabulated)", kind));
}

Schedule parse_schedule(const Node& n, ScheduleRole role, const std::filesystem::path& base) {
  if (!n.value().is_array()) n.fail("expected an array of segments");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < n.value().size(); ++i) segs.push_back(parse_segment(n.at(i), base));
  try {
    return Schedule(std::move(segs), role);
  } catch (const ParameterError& e) {
    n.fail(e.what());
  }
}

json segment_json(const Segment& seg) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SquarePulse>) {
          return {{"kind", "square"},
                  {"start", format_quantity(s.start, Dimension::time)},
                  {"end", format_quantity(s.end, Dimension::time)},
                  {"amplitude", format_quantity(s.amplitude, Dimension::rate)}};
        } else if constexpr (std::is_same_v<T, GaussianPulse>) {
          return {{"kind", "gaussian"},
                  {"center", format_quantity(s.center, Dimension::time)},
                  {"width", format_quantity(s.width, Dimension::time)},
                  {"start", format_quantity(s.start, Dimension::time)},
                  {"end", format_quantity(s.end, Dimension::time)},
                  {"amplitude", format_quantity(s.amplitude, Dimension::rate)}};
        } else {
          const char* kind = std::is_same_v<T, Tabulated> ? "tabulated" : "piecewise-linear";
          return {{"kind", kind}, {"time_unit", "s"}, {"value_unit", "Hz_angular"}, {"times", s.times},
                  {"values", s.values}};
        }
      },
      seg);
}

json schedule_json(const Schedule& s) {
  json arr = json::array();
  for (const auto& seg : s.segments()) arr.push_back(segment_json(seg));
  return arr;
}

ModelKind parse_model(const Node& n) {
  const std::string m = n.str();
  for (ModelKind k : {ModelKind::cavity_full, ModelKind::cavity_adiabatic, ModelKind::freespace_analytic,
                      ModelKind::freespace_numeric})
    if (m == to_string(k)) return k;
  n.fail(fmt::format("unknown model '{}' (cavity-full, cavity-adiabatic, freespace-analytic, freespace-numeric)", m));
}

InputSpec parse_input(const Node& n) {
  n.expect_object({"kind", "center", "fwtm", "start", "end", "csv", "method", "compensate_detuning", "normalize"});
  InputSpec in;
  in.kind = n.child("kind").str();
  if (in.kind == "gaussian") {
    in.center = n.child("center").quantity(Dimension::time);
    in.fwtm = n.child("fwtm").quantity(Dimension::time);
    if (!(in.fwtm > 0.0)) n.child("fwtm").fail("must be positive");
  } else if (in.kind == "square") {
    in.start = n.child("start").quantity(Dimension::time);
    in.end = n.child("end").quantity(Dimension::time);
    if (!(in.end > in.start)) n.child("end").fail("must be after start");
  } else if (in.kind == "csv") {
    in.path = n.child("csv").str();
  } else if (in.kind == "optimal-write") {
    if (n.has("method")) {
      const std::string m = n.child("method").str();
      if (m != "closed-form" && m != "variational") n.child("method").fail("expected closed-form or variational");
      in.variational = m == "variational";
    }
  } else if (in.kind != "none") {
    n.child("kind").fail(
        fmt::format("unknown input kind '{}' (none, optimal-write, gaussian, square, csv)", in.kind));
  }
  if (n.has("compensate_detuning")) in.compensate_detuning = n.child("compensate_detuning").boolean();
  if (n.has("normalize")) in.normalize = n.child("normalize").boolean();
  return in;
}

FreeSpaceSpec parse_freespace(const Node& n) {
  n.expect_object({"length", "gamma", "pulse_fwtm", "pulse_center", "coupling_fwtm", "coupling_offset",
                   "span_factor", "dt", "nz", "optical_depth", "direction"});
  FreeSpaceSpec fs;
  FreeSpaceScenario& s = fs.scenario;
  s.medium.length = n.child("length").quantity(Dimension::length);
  s.medium.gamma = n.child("gamma").quantity(Dimension::rate);
  s.pulse_fwtm = n.quantity_or("pulse_fwtm", Dimension::time, s.pulse_fwtm);
  s.pulse_center = n.quantity_or("pulse_center", Dimension::time, s.pulse_center);
  s.coupling_fwtm = n.quantity_or("coupling_fwtm", Dimension::time, s.coupling_fwtm);
  s.coupling_offset = n.quantity_or("coupling_offset", Dimension::time, s.coupling_offset);
  s.span_factor = n.quantity_or("span_factor", Dimension::dimensionless, s.span_factor);
  s.dt = n.quantity_or("dt", Dimension::time, s.dt);
  if (n.has("nz")) s.nz = n.child("nz").count();
  fs.optical_depth = n.quantity_or("optical_depth", Dimension::dimensionless, 0.0);
  if (n.has("direction")) {
    const std::string d = n.child("direction").str();
    if (d != "forward" && d != "backward") n.child("direction").fail("expected forward or backward");
    fs.backward = d == "backward";
  }
  return fs;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    throw ConfigError(fmt::format("syntax error at line {}: {}", line_of(text, pos), e.what()), "<syntax>",
                      line_of(text, pos));
  }
  const Locator loc(text);
  const Node n(root, {}, loc);
  n.expect_object({"name", "model", "params", "grid", "schedules", "storage_time", "input", "initial_sigma",
                   "freespace", "design", "outputs"});

  Scenario s;
  s.base_dir = base_dir;
  if (n.has("name")) s.name = n.child("name").str();
  s.model = parse_model(n.child("model"));

  if (is_freespace(s.model)) {
    s.freespace = parse_freespace(n.child("freespace"));
  } else {
    const Node p = n.child("params");
    p.expect_object({"kappa", "gamma"});
    s.cavity.kappa = p.child("kappa").quantity(Dimension::rate);
    s.cavity.gamma = p.quantity_or("gamma", Dimension::rate, 0.0);
    try {
      s.cavity.validate();
    } catch (const ParameterError& e) {
      p.fail(e.what());
    }
    const Node g = n.child("grid");
    g.expect_object({"t0", "dt", "n", "t_end"});
    GridSpec gs;
    gs.t0 = g.child("t0").quantity(Dimension::time);
    gs.dt = g.child("dt").quantity(Dimension::time);
    if (!(gs.dt > 0.0)) g.child("dt").fail("must be positive");
    if (g.has("n") == g.has("t_end")) g.fail("give exactly one of 'n' or 't_end'");
    if (g.has("n")) {
      gs.n = g.child("n").count();
    } else {
      const double t_end = g.child("t_end").quantity(Dimension::time);
      gs.n = static_cast<std::size_t>(std::llround((t_end - gs.t0) / gs.dt)) + 1;
    }
    if (gs.n < 2) g.fail("grid needs at least 2 points");
    s.grid = gs;
  }

  if (n.has("schedules")) {
    const Node sc = n.child("schedules");
    sc.expect_object({"g_write", "g_read", "delta"});
    if (sc.has("g_write")) s.g_write = parse_schedule(sc.child("g_write"), ScheduleRole::coupling, base_dir);
    if (sc.has("g_read")) s.g_read = parse_schedule(sc.child("g_read"), ScheduleRole::coupling, base_dir);
    if (sc.has("delta")) s.delta = parse_schedule(sc.child("delta"), ScheduleRole::detuning, base_dir);
  }
  s.storage_time = n.quantity_or("storage_time", Dimension::time, 0.0);
  if (!(s.storage_time >= 0.0)) n.child("storage_time").fail("must be non-negative");
  if (s.freespace) {
    s.freespace->scenario.storage_time = s.storage_time;
    s.freespace->scenario.delta = s.delta;
    try {
      s.freespace->scenario.validate();
    } catch (const Error& e) {
      n.child("freespace").fail(e.what());
    }
  }
  if (n.has("input")) s.input = parse_input(n.child("input"));
  if (n.has("initial_sigma")) {
    const Node is = n.child("initial_sigma");
    if (!is.value().is_array() || is.value().size() != 2) is.fail("expected [re, im]");
    s.initial_sigma = cplx(is.at(0).number(), is.at(1).number());
  }
  if (n.has("design")) {
    const Node d = n.child("design");
    d.expect_object({"eta_w", "eta_r"});
    s.design = DesignSpec{d.child("eta_w").quantity(Dimension::dimensionless),
                          d.child("eta_r").quantity(Dimension::dimensionless)};
  }
  if (n.has("outputs")) {
    const Node o = n.child("outputs");
    if (!o.value().is_array()) o.fail("expected an array of file names");
    static const std::set<std::string> known{"result.json", "e_out.csv", "spinwave.csv", "sweep.csv"};
    for (std::size_t i = 0; i < o.value().size(); ++i) {
      const std::string f = o.at(i).str();
      if (!known.count(f)) o.at(i).fail(fmt::format("unknown artifact '{}'", f));
      s.outputs.push_back(f);
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open config {}", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["model"] = to_string(s.model);
  if (s.freespace) {
    const FreeSpaceScenario& f = s.freespace->scenario;
    j["freespace"] = {{"length", format_quantity(f.medium.length, Dimension::length)},
                      {"gamma", format_quantity(f.medium.gamma, Dimension::rate)},
                      {"pulse_fwtm", format_quantity(f.pulse_fwtm, Dimension::time)},
                      {"pulse_center", format_quantity(f.pulse_center, Dimension::time)},
                      {"coupling_fwtm", format_quantity(f.coupling_fwtm, Dimension::time)},
                      {"coupling_offset", format_quantity(f.coupling_offset, Dimension::time)},
                      {"span_factor", f.span_factor},
                      {"dt", format_quantity(f.dt, Dimension::time)},
                      {"nz", f.nz},
                      {"optical_depth", s.freespace->optical_depth},
                      {"direction", s.freespace->backward ? "backward" : "forward"}};
  } else {
    j["params"] = {{"kappa", format_quantity(s.cavity.kappa, Dimension::rate)},
                   {"gamma", format_quantity(s.cavity.gamma, Dimension::rate)}};
  }
  if (s.grid)
    j["grid"] = {{"t0", format_quantity(s.grid->t0, Dimension::time)},
                 {"dt", format_quantity(s.grid->dt, Dimension::time)},
                 {"n", s.grid->n}};
  json sch = json::object();
  if (!s.g_write.empty()) sch["g_write"] = schedule_json(s.g_write);
  if (!s.g_read.empty()) sch["g_read"] = schedule_json(s.g_read);
  if (!s.delta.empty()) sch["delta"] = schedule_json(s.delta);
  if (!sch.empty()) j["schedules"] = sch;
  j["storage_time"] = format_quantity(s.storage_time, Dimension::time);

  json in = {{"kind", s.input.kind}};
  if (s.input.kind == "gaussian") {
    in["center"] = format_quantity(s.input.center, Dimension::time);
    in["fwtm"] = format_quantity(s.input.fwtm, Dimension::time);
  } else if (s.input.kind == "square") {
    in["start"] = format_quantity(s.input.start, Dimension::time);
    in["end"] = format_quantity(s.input.end, Dimension::time);
  } else if (s.input.kind == "csv") {
    in["csv"] = s.input.path;
  } else if (s.input.kind == "optimal-write") {
    in["method"] = s.input.variational ? "variational" : "closed-form";
  }
  in["compensate_detuning"] = s.input.compensate_detuning;
  in["normalize"] = s.input.normalize;
  j["input"] = in;
  if (s.initial_sigma != 0.0) j["initial_sigma"] = {s.initial_sigma.real(), s.initial_sigma.imag()};
  if (s.design) j["design"] = {{"eta_w", s.design->eta_w}, {"eta_r", s.design->eta_r}};
  if (!s.outputs.empty()) j["outputs"] = s.outputs;
  return j;
}

std::string canonical_text(const Scenario& s) { return to_json(s).dump(); }

std::string scenario_hash(const Scenario& s) {
  const std::string text = canonical_text(s);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace dipmem
