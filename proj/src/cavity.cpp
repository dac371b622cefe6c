#include "dipmem/cavity.hpp"

#include "dipmem/effective.hpp"
#include "dipmem/errors.hpp"
#include "dipmem/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace dipmem {

void CavityParams::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw ParameterError(fmt::format("kappa must be positive (got {})", kappa));
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw ParameterError(fmt::format("gamma must be non-negative (got {})", gamma));
}

double CavityParams::cooperativity(double g) const {
  validate();
  if (gamma == 0.0) return std::numeric_limits<double>::infinity();
  return g * g / (kappa * gamma);
}

namespace {

constexpr cplx I{0.0, 1.0};

/// Per-cell energy bookkeeping shared by every simulator.
struct CellBook {
  std::vector<double> in, out, decay;
  std::vector<bool> on;
  explicit CellBook(std::size_t cells) : in(cells, 0.0), out(cells, 0.0), decay(cells, 0.0), on(cells, false) {}
};

double peak_abs(const Schedule& s) { return s.peak(); }

FieldEnvelope prepare_input(const FieldEnvelope& e_in, const SimOptions& opt) {
  if (!opt.grid || *opt.grid == e_in.grid()) return e_in;
  if (!opt.grid->aligned_with(e_in.grid()))
    throw ParameterError("input envelope grid is incompatible with the simulation grid");
  return e_in.extended_to(*opt.grid);
}

void finish_ledger(SimResult& r, const CellBook& book, const Schedule& g) {
  (void)g;
  const std::size_t cells = book.in.size();
  auto& L = r.ledger;
  L.input_energy = 0.0;
  for (double v : book.in) L.input_energy += v;

  r.cell_flux.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) r.cell_flux[k] = book.in[k] - book.out[k] - book.decay[k];

  std::size_t write_end = 0;
  if (L.input_energy > 0.0) {
    auto first_on = std::find(book.on.begin(), book.on.end(), true);
    if (first_on == book.on.end()) {
      write_end = cells;
    } else {
      auto first_off = std::find(first_on, book.on.end(), false);
      write_end = static_cast<std::size_t>(first_off - book.on.begin());
    }
  }
  L.write_end = write_end;

  std::optional<std::size_t> read_start;
  for (std::size_t k = write_end; k < cells; ++k)
    if (book.on[k]) {
      read_start = k;
      break;
    }
  L.read_start = read_start;

  double leak = 0.0, dec_w = 0.0, dec_tot = 0.0, emitted = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    dec_tot += book.decay[k];
    if (k < write_end) {
      leak += book.out[k];
      dec_w += book.decay[k];
    }
    if (read_start && k >= *read_start) emitted += book.out[k];
  }
  L.output_energy = 0.0;
  for (double v : book.out) L.output_energy += v;
  L.decay_loss_total = dec_tot;
  L.emitted_read = emitted;

  if (L.input_energy > 0.0) {
    L.leakage = leak / L.input_energy;
    L.decay_loss_write = dec_w / L.input_energy;
    const double stored = std::norm(r.sigma[write_end]);
    L.eta_w = stored / L.input_energy;
    if (r.full_model) L.residual_cavity = std::norm(r.e_cav[write_end]) / L.input_energy;
    if (read_start) L.eta_tot = emitted / L.input_energy;
  }
  if (read_start) {
    const double held = r.excitation[*read_start];
    if (held > 0.0) L.eta_r = emitted / held;
  }

  double scale = 0.0;
  for (std::size_t k = 0; k < r.grid.size(); ++k)
    scale = std::max({scale, std::norm(r.e_in[k]), std::norm(r.e_out[k])});
  r.flux_scale = scale;
  r.continuity_residual = continuity_residual(r);
}

// largest rate * step taken by a single RK4 step
constexpr double max_phase_step = 0.025;

/// Drives a fixed-step RK4 integration cell by cell, splitting cells at
/// schedule breakpoints and taking one-sided values at jumps. Pieces are
/// subdivided so that fast_rate * step stays below max_phase_step.
template <std::size_t N, class Model>
SimResult integrate(const FieldEnvelope& e_in_raw, const Schedule& g, const Schedule& delta,
                    const Model& model, std::array<cplx, N> y, bool full, double fast_rate) {
  const FieldEnvelope& e_in = e_in_raw;
  const TimeGrid& grid = e_in.grid();
  const std::size_t n = grid.size();
  const double dt = grid.dt();
  const auto gb = g.breakpoints(), db = delta.breakpoints();
  const auto bps = merge_breakpoints({&gb, &db});
  const double thr = g.zero_threshold();

  SimResult r{grid, std::vector<cplx>(n), std::vector<cplx>(n), e_in, FieldEnvelope::zeros(grid),
              std::vector<double>(n), {}, 0.0, {}, 0.0, full};
  std::vector<cplx> e_out(n, 0.0);
  CellBook book(n - 1);

  auto record = [&](std::size_t k, const std::array<cplx, N>& s, double gv, cplx ein) {
    r.sigma[k] = model.sigma(s);
    r.e_cav[k] = model.cavity(s, gv, ein);
    r.excitation[k] = model.excitation(s);
  };

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double tk = grid.time(k);
    const auto pts = split_points(tk, grid.time(k + 1), bps);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
      const double lo = pts[j], hi = pts[j + 1];
      auto drive = [&](double t) {
        return std::tuple{g.on_interval(t, lo, hi), delta.on_interval(t, lo, hi),
                          e_in.in_cell(k, std::clamp((t - tk) / dt, 0.0, 1.0))};
      };
      // state plus the accumulated input, output and decay energies
      auto rhs = [&](double t, const std::array<cplx, N + 3>& s) {
        const auto [gv, dv, ein] = drive(t);
        std::array<cplx, N> x;
        std::copy_n(s.begin(), N, x.begin());
        const auto dx = model.rhs(x, gv, dv, ein);
        std::array<cplx, N + 3> out;
        std::copy_n(dx.begin(), N, out.begin());
        out[N] = std::norm(ein);
        out[N + 1] = std::norm(model.output(x, gv, ein));
        out[N + 2] = model.decay(x);
        return out;
      };

      const auto [g0, d0, i0] = drive(lo);
      if (g0 > thr) book.on[k] = true;
      const cplx o0 = model.output(y, g0, i0);
      if (j == 0) {
        record(k, y, g0, i0);
        e_out[k] = o0;
      }
      std::array<cplx, N + 3> aug{};
      std::copy_n(y.begin(), N, aug.begin());
      const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) * fast_rate / max_phase_step)));
      const double h = (hi - lo) / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) aug = rk4_step<N + 3>(aug, lo + static_cast<double>(i) * h, h, rhs);
      std::copy_n(aug.begin(), N, y.begin());

      const auto [g1, d1, i1] = drive(hi);
      if (g.on_interval(0.5 * (lo + hi), lo, hi) > thr) book.on[k] = true;
      const cplx o1 = model.output(y, g1, i1);
      book.in[k] += aug[N].real();
      book.out[k] += aug[N + 1].real();
      book.decay[k] += aug[N + 2].real();

      if (k + 2 == n && j + 2 == pts.size()) {
        record(n - 1, y, g1, i1);
        e_out[n - 1] = o1;
      }
    }
  }
  r.e_out = FieldEnvelope(grid, std::move(e_out));
  finish_ledger(r, book, g);
  return r;
}

struct AdiabaticModel {
  double kappa, gamma;
  std::array<cplx, 1> rhs(const std::array<cplx, 1>& s, double gv, double dv, cplx ein) const {
    return {-(I * dv + gamma + gv * gv / kappa) * s[0] + I * std::sqrt(2.0 / kappa) * gv * ein};
  }
  cplx output(const std::array<cplx, 1>& s, double gv, cplx ein) const {
    return ein + I * std::sqrt(2.0 / kappa) * gv * s[0];
  }
  cplx sigma(const std::array<cplx, 1>& s) const { return s[0]; }
  cplx cavity(const std::array<cplx, 1>& s, double gv, cplx ein) const {
    return (I * gv * s[0] + std::sqrt(2.0 * kappa) * ein) / kappa;
  }
  double excitation(const std::array<cplx, 1>& s) const { return std::norm(s[0]); }
  double decay(const std::array<cplx, 1>& s) const { return 2.0 * gamma * std::norm(s[0]); }
};

struct FullModel {
  double kappa, gamma;
  std::array<cplx, 2> rhs(const std::array<cplx, 2>& s, double gv, double dv, cplx ein) const {
    return {-(I * dv + gamma) * s[0] + I * gv * s[1],
            I * gv * s[0] - kappa * s[1] + std::sqrt(2.0 * kappa) * ein};
  }
  cplx output(const std::array<cplx, 2>& s, double, cplx ein) const {
    return -ein + std::sqrt(2.0 * kappa) * s[1];
  }
  cplx sigma(const std::array<cplx, 2>& s) const { return s[0]; }
  cplx cavity(const std::array<cplx, 2>& s, double, cplx) const { return s[1]; }
  double excitation(const std::array<cplx, 2>& s) const { return std::norm(s[0]) + std::norm(s[1]); }
  double decay(const std::array<cplx, 2>& s) const { return 2.0 * gamma * std::norm(s[0]); }
};

}  // namespace

SimResult simulate_full(const FieldEnvelope& e_in_raw, const Schedule& g, const Schedule& delta,
                        const CavityParams& p, const SimOptions& opt) {
  p.validate();
  const FieldEnvelope e_in = prepare_input(e_in_raw, opt);
  const double dt = e_in.grid().dt();
  if (dt * p.kappa > 0.1 * (1.0 + 1e-9))
    throw StabilityError(fmt::format("dt={} s does not resolve the cavity decay: need dt <= 0.1/kappa = {} s",
                                     dt, 0.1 / p.kappa));
  const double fast = std::max({peak_abs(g), peak_abs(delta), p.gamma});
  if (dt * fast > 0.5)
    throw StabilityError(fmt::format("dt={} s too coarse for coupling/detuning rate {} rad/s", dt, fast));
  return integrate<2>(e_in, g, delta, FullModel{p.kappa, p.gamma},
                      std::array<cplx, 2>{opt.initial.sigma, opt.initial.e_cav}, true, std::max(fast, p.kappa));
}

SimResult simulate_adiabatic(const FieldEnvelope& e_in_raw, const Schedule& g, const Schedule& delta,
                             const CavityParams& p, const SimOptions& opt) {
  p.validate();
  const FieldEnvelope e_in = prepare_input(e_in_raw, opt);
  const double dt = e_in.grid().dt();
  const double gp = peak_abs(g);
  const double rate = gp * gp / p.kappa + p.gamma + peak_abs(delta);
  if (dt * rate > 0.5)
    throw StabilityError(fmt::format("dt={} s too coarse for the adiabatic rate {} rad/s (need dt*rate <= 0.5)",
                                     dt, rate));
  return integrate<1>(e_in, g, delta, AdiabaticModel{p.kappa, p.gamma}, std::array<cplx, 1>{opt.initial.sigma},
                      false, rate);
}

SimResult read_analytic(cplx sigma0, const Schedule& g, const CavityParams& p, const TimeGrid& grid) {
  p.validate();
  const std::size_t n = grid.size();
  const auto bps = g.breakpoints();
  const double thr = g.zero_threshold();
  const double amp = std::sqrt(2.0 / p.kappa);
  const double t0 = grid.t0();

  FieldEnvelope zero_in = FieldEnvelope::zeros(grid);
  SimResult r{grid, std::vector<cplx>(n), std::vector<cplx>(n), zero_in, zero_in, std::vector<double>(n),
              {}, 0.0, {}, 0.0, false};
  std::vector<cplx> e_out(n, 0.0);
  CellBook book(n - 1);

  auto sigma_at = [&](double tau, double t) { return sigma0 * std::exp(-tau - p.gamma * (t - t0)); };

  double tau = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto pts = split_points(grid.time(k), grid.time(k + 1), bps);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
      const double lo = pts[j], hi = pts[j + 1];
      const double g0 = g.on_interval(lo, lo, hi), g1 = g.on_interval(hi, lo, hi);
      if (g.on_interval(0.5 * (lo + hi), lo, hi) > thr) book.on[k] = true;
      const cplx s0 = sigma_at(tau, lo);
      const double tau1 = tau + 0.5 * (hi - lo) * (g0 * g0 + g1 * g1) / p.kappa;
      const cplx s1 = sigma_at(tau1, hi);
      const cplx o0 = I * amp * g0 * s0, o1 = I * amp * g1 * s1;
      if (j == 0) {
        r.sigma[k] = s0;
        r.e_cav[k] = I * g0 * s0 / p.kappa;
        r.excitation[k] = std::norm(s0);
        e_out[k] = o0;
      }
      if (p.gamma == 0.0) {
        // exact: the emitted energy is the drop in |sigma|^2
        book.out[k] += std::norm(s0) - std::norm(s1);
      } else {
        const double mid = 0.5 * (lo + hi), gm = g.on_interval(mid, lo, hi);
        const cplx sm = sigma_at(tau + 0.25 * (hi - lo) * (g0 * g0 + gm * gm) / p.kappa, mid);
        const double w = (hi - lo) / 6.0;
        book.out[k] += w * (std::norm(o0) + 4.0 * std::norm(I * amp * gm * sm) + std::norm(o1));
        book.decay[k] += 2.0 * p.gamma * w * (std::norm(s0) + 4.0 * std::norm(sm) + std::norm(s1));
      }
      tau = tau1;
      if (k + 2 == n && j + 2 == pts.size()) {
        r.sigma[n - 1] = s1;
        r.e_cav[n - 1] = I * g1 * s1 / p.kappa;
        r.excitation[n - 1] = std::norm(s1);
        e_out[n - 1] = o1;
      }
    }
  }
  r.e_out = FieldEnvelope(grid, std::move(e_out));
  finish_ledger(r, book, g);
  if (p.gamma == 0.0 && r.ledger.read_start) r.ledger.eta_r = 1.0 - std::exp(-2.0 * tau);
  return r;
}

double square_pulse_efficiency(double g0, double duration, const CavityParams& p) {
  p.validate();
  if (!(g0 >= 0.0)) throw ParameterError(fmt::format("g0 must be non-negative (got {})", g0));
  if (!(duration >= 0.0)) throw ParameterError(fmt::format("duration must be non-negative (got {})", duration));
  const double r = g0 * g0 / p.kappa;
  const double total = r + p.gamma;
  if (total == 0.0) return 0.0;
  return r / total * (1.0 - std::exp(-2.0 * total * duration));
}

double continuity_residual(const SimResult& result) {
  if (!(result.flux_scale > 0.0)) return 0.0;
  const double dt = result.grid.dt();
  double worst = 0.0;
  for (std::size_t k = 0; k < result.cell_flux.size(); ++k) {
    const double change = result.excitation[k + 1] - result.excitation[k];
    worst = std::max(worst, std::abs(change - result.cell_flux[k]));
  }
  return worst / (dt * result.flux_scale);
}

}  // namespace dipmem
