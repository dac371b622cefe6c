#include "dipmem/verify.hpp"

#include "dipmem/cavity.hpp"
#include "dipmem/control.hpp"
#include "dipmem/effective.hpp"
#include "dipmem/errors.hpp"
#include "dipmem/freespace.hpp"

#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <ostream>

namespace dipmem {

namespace {

const Schedule no_detuning{{}, ScheduleRole::detuning};

CheckResult below(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value < tol, value, tol, std::move(detail)};
}

CheckResult read_law() {
  const CavityParams p{1e9, 0.0};
  const TimeGrid grid(0.0, 2e-10, 2001);
  const Schedule g = Schedule::square(20e-9, 320e-9, 6e7);
  SimOptions opt;
  opt.initial.sigma = 1.0;
  const SimResult r = simulate_adiabatic(FieldEnvelope::zeros(grid), g, no_detuning, p, opt);
  const double tau = effective_time(g, p.kappa, grid).total();
  const double emitted = r.ledger.emitted_read / r.excitation[*r.ledger.read_start];
  const double expect = 1.0 - std::exp(-2.0 * tau);
  return below("read efficiency equals 1 - exp(-2 tau_r)", std::abs(emitted - expect) / expect, 1e-6,
               fmt::format("tau_r={:.4f} eta_r={:.9f}", tau, emitted));
}

CheckResult write_bound() {
  const CavityParams p{1e9, 0.0};
  const TimeGrid grid(0.0, 1e-10, 4001);
  const Schedule g = Schedule::gaussian(200e-9, 60e-9, 7e7, 180e-9);
  const FieldEnvelope e = optimal_write_input(g, p, grid);
  const SimResult r = simulate_adiabatic(e, g, no_detuning, p);
  const double tau = effective_time(g, p.kappa, grid).total();
  const double expect = 1.0 - std::exp(-2.0 * tau);
  return below("optimal write input reaches 1 - exp(-2 tau_w)", std::abs(*r.ledger.eta_w - expect), 1e-6,
               fmt::format("tau_w={:.4f} eta_w={:.9f}", tau, *r.ledger.eta_w));
}

CheckResult cavity_continuity() {
  const CavityParams p{2e9, 0.0};
  const TimeGrid grid(0.0, 2e-11, 40001);
  const Schedule g = Schedule::concat(Schedule::square(0.0, 250e-9, 1.0e7), Schedule::square(450e-9, 750e-9, 1.3e7));
  const FieldEnvelope e = optimal_write_input(Schedule::square(0.0, 250e-9, 1.0e7), p, grid);
  const SimResult r = simulate_full(e, g, no_detuning, p);
  return below("continuity holds in the full cavity model", r.continuity_residual, 1e-6);
}

CheckResult zero_coupling() {
  const CavityParams p{1e9, 1e5};
  const TimeGrid grid(0.0, 1e-9, 501);
  std::vector<cplx> v(grid.size(), 1.0);
  const FieldEnvelope e = FieldEnvelope(grid, v).normalized();
  const SimResult r = simulate_adiabatic(e, Schedule(std::vector<Segment>{}), no_detuning, p);
  return below("zero coupling reflects the whole input", std::abs(r.ledger.output_energy - r.ledger.input_energy), 1e-12,
               fmt::format("eta_w={}", r.ledger.eta_w.value_or(0.0)));
}

CheckResult decay_square() {
  const CavityParams p{1e9, 2e5};
  const double g0 = 2e7;
  const TimeGrid grid(0.0, 1e-10, 3001);
  const Schedule g = Schedule::square(0.0, 300e-9, g0);
  const FieldEnvelope e = optimal_write_input(g, p, grid);
  const SimResult r = simulate_adiabatic(e, g, no_detuning, p);
  const double expect = square_pulse_efficiency(g0, 300e-9, p);
  return below("square pulse with decay matches the closed form", std::abs(*r.ledger.eta_w - expect), 1e-6,
               fmt::format("C={:.3g} eta_w={:.9f}", p.cooperativity(g0), *r.ledger.eta_w));
}

struct FreeSpaceCase {
  MediumParams m{0.01, 5e4};
  TimeGrid grid{0.0, 4e-9, 201};
  Schedule g = Schedule::square(0.0, 800e-9, 1.0);
  FieldEnvelope e = FieldEnvelope::zeros(grid);
  SpinWave s0;

  FreeSpaceCase() {
    g = g.scaled(m.coupling_for_depth(20.0));
    std::vector<cplx> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double x = (grid.time(k) - 300e-9) / 80e-9;
      v[k] = std::exp(-0.5 * x * x);
    }
    e = FieldEnvelope(grid, v).normalized();
    s0 = SpinWave::zeros(m.length, 201);
    for (std::size_t j = 0; j < s0.size(); ++j) s0.samples[j] = 0.3 * std::sin(M_PI * s0.z(j) / m.length);
  }
};

CheckResult freespace_agreement() {
  const FreeSpaceCase c;
  const auto a = analytic_evolution(c.e, c.s0, c.g, no_detuning, c.m);
  const auto b = numeric_evolution(c.e, c.s0, c.g, no_detuning, c.m);
  return below("free-space kernel solution matches the integrator", max_relative_difference(a, b), 1e-3);
}

CheckResult freespace_ledger() {
  const FreeSpaceCase c;
  const auto b = numeric_evolution(c.e, c.s0, c.g, no_detuning, c.m, {false});
  return below("free-space energy ledger closes", b.ledger.balance_residual, 1e-4);
}

}  // namespace

std::vector<CheckResult> run_invariant_suite() {
  const std::vector<std::function<CheckResult()>> checks{read_law,     write_bound,         cavity_continuity,
                                                         zero_coupling, decay_square,       freespace_agreement,
                                                         freespace_ledger};
  std::vector<CheckResult> out;
  for (const auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"(check threw)", false, NAN, 0.0, e.what()});
    }
  }
  return out;
}

bool report(const std::vector<CheckResult>& results, std::ostream& os) {
  bool ok = true;
  for (const auto& r : results) {
    os << fmt::format("{} {:<52} value={:.3e} tol={:.0e}{}{}\n", r.passed ? "PASS" : "FAIL", r.name, r.value,
                      r.tolerance, r.detail.empty() ? "" : "  ", r.detail);
    ok = ok && r.passed;
  }
  return ok;
}

}  // namespace dipmem
