#include "dipmem/control.hpp"

#include "dipmem/effective.hpp"
#include "dipmem/errors.hpp"
#include "dipmem/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace dipmem {

namespace {
constexpr cplx I{0.0, 1.0};

/// g just right of t_k (k < last) or just left of it (k == last).
double one_sided(const Schedule& g, const TimeGrid& grid, std::size_t k, bool from_left) {
  const double t = grid.time(k);
  if (from_left) return g.on_interval(t, grid.time(k - 1), t);
  return g.on_interval(t, t, grid.time(k + 1));
}
}  // namespace

CouplingWindow coupling_window(const Schedule& g, const TimeGrid& grid) {
  const auto bps = g.breakpoints();
  const double thr = g.zero_threshold();
  std::optional<std::size_t> first, last_cell;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const auto pts = split_points(grid.time(k), grid.time(k + 1), bps);
    bool on = false;
    for (std::size_t j = 0; j + 1 < pts.size() && !on; ++j) {
      const double mid = 0.5 * (pts[j] + pts[j + 1]);
      on = g.on_interval(mid, pts[j], pts[j + 1]) > thr;
    }
    if (on) {
      if (!first) first = k;
      last_cell = k;
    }
  }
  if (!first) throw ParameterError("coupling never switches on: no write window on this grid");
  return CouplingWindow{*first, *last_cell + 1, grid.time(*last_cell + 1)};
}

FieldEnvelope optimal_write_input(const Schedule& g_w, const CavityParams& p, const TimeGrid& grid) {
  p.validate();
  if (p.gamma > 0.0) {
    const auto& segs = g_w.segments();
    if (segs.size() != 1 || !std::holds_alternative<SquarePulse>(segs.front()))
      throw UnsupportedCaseError(
          "closed-form optimal input with gamma > 0 exists only for a single square coupling pulse; "
          "use variational_optimize");
  }
  const CouplingWindow win = coupling_window(g_w, grid);
  const auto tau = effective_time(g_w, p.kappa, grid).tau;
  const double tau_end = tau[win.last];

  std::vector<cplx> s(grid.size(), 0.0);
  for (std::size_t k = win.first; k <= win.last; ++k) {
    const double gk = one_sided(g_w, grid, k, k == win.last);
    s[k] = gk * std::exp(tau[k] - tau_end + p.gamma * (grid.time(k) - win.t_end));
  }
  return FieldEnvelope(grid, std::move(s), win.first, win.last).normalized();
}

double write_efficiency_of(const FieldEnvelope& e_in, const Schedule& g_w, const CavityParams& p) {
  p.validate();
  const double energy = e_in.norm();
  if (!(energy > 0.0)) throw ParameterError("write efficiency of a zero-norm input is undefined");
  const TimeGrid& grid = e_in.grid();
  const CouplingWindow win = coupling_window(g_w, grid);
  const auto tau = effective_time(g_w, p.kappa, grid).tau;
  const double tau_end = tau[win.last];
  const EffectiveEnvelope eff = to_effective(e_in, g_w, p.kappa, FieldRole::input);

  cplx integral = 0.0;
  auto f = [&](std::size_t i) {
    return std::exp(eff.tau[i] - tau_end + p.gamma * (eff.t[i] - win.t_end)) * eff.value[i];
  };
  for (std::size_t i = 0; i + 1 < eff.size(); ++i)
    integral += 0.5 * (eff.tau[i + 1] - eff.tau[i]) * (f(i) + f(i + 1));
  const cplx sigma_end = I * std::sqrt(2.0) * integral;
  return std::norm(sigma_end) / energy;
}

cplx WriteFunctional::apply(const FieldEnvelope& e) const {
  if (!(e.grid() == grid)) throw ParameterError("envelope grid differs from the functional's grid");
  cplx s = 0.0;
  for (std::size_t k = window.first; k <= window.last; ++k) s += weight[k] * e[k];
  return s;
}

double WriteFunctional::efficiency(const FieldEnvelope& e) const {
  const double energy = e.norm();
  if (!(energy > 0.0)) throw ParameterError("write efficiency of a zero-norm input is undefined");
  return std::norm(apply(e)) / energy;
}

WriteFunctional write_functional(const Schedule& g_w, const Schedule& delta, const CavityParams& p,
                                 const TimeGrid& grid) {
  p.validate();
  const CouplingWindow win = coupling_window(g_w, grid);
  const auto gb = g_w.breakpoints(), db = delta.breakpoints();
  const auto bps = merge_breakpoints({&gb, &db});
  const double amp = std::sqrt(2.0 / p.kappa);
  const double dt = grid.dt();

  WriteFunctional F{grid, win, std::vector<cplx>(grid.size(), 0.0), std::vector<double>(grid.size(), 0.0)};

  // Adjoint propagator phi(t) = exp(-int_t^{t_end} (g^2/kappa + gamma + i delta)),
  // integrated backwards from phi(t_end) = 1.
  std::array<cplx, 1> phi{1.0};
  for (std::size_t k = win.last; k-- > win.first;) {
    const auto pts = split_points(grid.time(k), grid.time(k + 1), bps);
    for (std::size_t j = pts.size() - 1; j > 0; --j) {
      const double lo = pts[j - 1], hi = pts[j];
      auto rhs = [&](double t, const std::array<cplx, 1>& y) {
        const double gv = g_w.on_interval(t, lo, hi);
        const double dv = delta.on_interval(t, lo, hi);
        return std::array<cplx, 1>{(gv * gv / p.kappa + p.gamma + I * dv) * y[0]};
      };
      if (j == pts.size() - 1) F.weight[k + 1] += 0.5 * dt * I * amp * g_w.on_interval(hi, lo, hi) * phi[0];
      phi = rk4_step<1>(phi, hi, lo - hi, rhs);
      if (j == 1) F.weight[k] += 0.5 * dt * I * amp * g_w.on_interval(lo, lo, hi) * phi[0];
    }
  }
  for (std::size_t k = win.first; k <= win.last; ++k)
    F.norm_weight[k] = (k == win.first || k == win.last) ? 0.5 * dt : dt;
  return F;
}

FieldEnvelope variational_optimize(const Schedule& g_w, const Schedule& delta, const CavityParams& p,
                                   const TimeGrid& grid, const VariationalOptions& opt) {
  const WriteFunctional F = write_functional(g_w, delta, p, grid);
  const auto& W = F.norm_weight;
  const std::size_t a = F.window.first, b = F.window.last;

  std::vector<cplx> x(grid.size(), 0.0);
  if (opt.start) {
    if (!(opt.start->grid() == grid)) throw ParameterError("start envelope is on a different grid");
    for (std::size_t k = a; k <= b; ++k) x[k] = (*opt.start)[k];
  } else {
    for (std::size_t k = a; k <= b; ++k) x[k] = 1.0;
  }

  auto functional = [&](const std::vector<cplx>& v) {
    cplx s = 0.0;
    for (std::size_t k = a; k <= b; ++k) s += F.weight[k] * v[k];
    return s;
  };
  auto wnorm = [&](const std::vector<cplx>& v) {
    double s = 0.0;
    for (std::size_t k = a; k <= b; ++k) s += W[k] * std::norm(v[k]);
    return std::sqrt(s);
  };

  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const cplx s = functional(x);
    if (std::abs(s) == 0.0)
      throw ConvergenceError("power iteration stalled: iterate is orthogonal to the write kernel", residual);
    // Gradient of |sigma|^2 with respect to conj(E), preconditioned by the
    // quadrature weights, is the next iterate.
    std::vector<cplx> y(grid.size(), 0.0);
    for (std::size_t k = a; k <= b; ++k) y[k] = std::conj(F.weight[k]) * s / W[k];
    const double ny = wnorm(y);
    const cplx sy = functional(y);
    const cplx phase = I * std::abs(sy) / sy;  // sigma(t_end) on the positive imaginary axis
    for (auto& v : y) v *= phase / ny;

    double diff = 0.0;
    for (std::size_t k = a; k <= b; ++k) diff += W[k] * std::norm(y[k] - x[k]);
    residual = std::sqrt(diff);
    x = std::move(y);
    if (residual < opt.tolerance) return FieldEnvelope(grid, std::move(x), a, b);
  }
  throw ConvergenceError(fmt::format("variational optimisation did not converge in {} iterations (residual {})",
                                     opt.max_iterations, residual),
                         residual);
}

FieldEnvelope compensate_detuning(const FieldEnvelope& e, const Schedule& delta, double t_ref) {
  const TimeGrid& grid = e.grid();
  const auto acc = accumulate_values(delta, grid);
  const double x = std::clamp((t_ref - grid.t0()) / grid.dt(), 0.0, static_cast<double>(grid.size() - 1));
  const auto k0 = std::min(static_cast<std::size_t>(x), grid.size() - 2);
  const double ref = acc[k0] + (x - static_cast<double>(k0)) * (acc[k0 + 1] - acc[k0]);
  std::vector<cplx> s(e.samples().begin(), e.samples().end());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] *= std::exp(I * (ref - acc[k]));
  return FieldEnvelope(grid, std::move(s), e.first(), e.last());
}

CouplingPair synthesize_couplings(const FieldEnvelope& e_in, double storage_time, double eta_w,
                                  double eta_r, const CavityParams& p) {
  p.validate();
  if (!(eta_w > 0.0 && eta_w < 1.0))
    throw ParameterError(fmt::format("eta_w must lie strictly between 0 and 1 (got {})", eta_w));
  if (!(eta_r > 0.0 && eta_r < 1.0))
    throw ParameterError(fmt::format("eta_r must lie strictly between 0 and 1 (got {})", eta_r));
  const double energy = e_in.norm();
  if (std::abs(energy - 1.0) > 1e-6)
    throw ParameterError(fmt::format(
        "input must be normalised with its support inside the grid (norm {} differs from 1 by more than 1e-6)",
        energy));

  const TimeGrid& grid = e_in.grid();
  const std::size_t n = grid.size();
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) peak = std::max(peak, std::norm(e_in[k]));
  std::size_t lo = n, hi = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (std::norm(e_in[k]) > 1e-20 * peak) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  lo = lo > 0 ? lo - 1 : 0;
  hi = std::min(hi + 1, n - 1);
  if (hi - lo < 1) throw ParameterError("input pulse is too short to tabulate couplings");
  if (storage_time < grid.time(hi) - grid.time(lo))
    throw ParameterError(fmt::format("storage time {} s is shorter than the pulse span {} s", storage_time,
                                     grid.time(hi) - grid.time(lo)));

  // running integral of |E_in|^2 from the first grid point
  std::vector<double> cumulative(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k)
    cumulative[k + 1] = cumulative[k] + 0.5 * grid.dt() * (std::norm(e_in[k]) + std::norm(e_in[k + 1]));

  std::vector<double> tw, gw, tr, gr;
  for (std::size_t k = lo; k <= hi; ++k) {
    const double intensity = std::norm(e_in[k]);
    const double F = std::min(cumulative[k], 1.0);
    tw.push_back(grid.time(k));
    gw.push_back(std::sqrt(p.kappa * eta_w * intensity / (2.0 * (1.0 - eta_w + eta_w * F))));
    tr.push_back(grid.time(k) + storage_time);
    gr.push_back(std::sqrt(p.kappa * eta_r * intensity / (2.0 * (1.0 - eta_r * F))));
  }
  return CouplingPair{Schedule::tabulated(std::move(tw), std::move(gw)),
                      Schedule::tabulated(std::move(tr), std::move(gr))};
}

double total_efficiency(double tau_w, double tau_r) {
  if (!(tau_w >= 0.0) || !(tau_r >= 0.0))
    throw ParameterError(fmt::format("effective times must be non-negative (got {}, {})", tau_w, tau_r));
  return (1.0 - std::exp(-2.0 * tau_w)) * (1.0 - std::exp(-2.0 * tau_r));
}

CooperativityEstimate cooperativity_from_depth(double depth, double finesse) {
  if (!(depth >= 0.0)) throw ParameterError(fmt::format("optical depth must be non-negative (got {})", depth));
  if (!(finesse >= 1.0)) throw ParameterError(fmt::format("finesse must be at least 1 (got {})", finesse));
  const double c = depth * finesse;
  return CooperativityEstimate{c, c / (c + 1.0)};
}

}  // namespace dipmem
