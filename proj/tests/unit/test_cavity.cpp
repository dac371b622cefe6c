#include <doctest.h>

#include "dipmem/cavity.hpp"
#include "dipmem/control.hpp"
#include "dipmem/effective.hpp"
#include "dipmem/errors.hpp"

#include <algorithm>
#include <cmath>

using namespace dipmem;

namespace {

const Schedule no_delta{std::vector<Segment>{}, ScheduleRole::detuning};
const cplx I(0.0, 1.0);

FieldEnvelope gaussian(const TimeGrid& grid, double center, double width) {
  std::vector<cplx> s(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = (grid.time(k) - center) / width;
    s[k] = std::exp(-0.5 * x * x);
  }
  return FieldEnvelope(grid, s).normalized();
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(CavityParams({0.0, 0.0}).validate(), ParameterError);
  CHECK_THROWS_AS(CavityParams({1e9, -1.0}).validate(), ParameterError);
  CHECK(CavityParams({1e9, 1e5}).cooperativity(1e7) == doctest::Approx(1.0));
}

TEST_CASE("full model: no input and no excitation stays at zero") {
  const TimeGrid grid(0.0, 1e-11, 2001);
  const auto r = simulate_full(FieldEnvelope::zeros(grid), Schedule::square(0.0, 1e-8, 1e7), no_delta, {1e9, 1e5});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(r.e_out[k] == cplx(0.0));
    CHECK(r.sigma[k] == cplx(0.0));
  }
}

TEST_CASE("full model: empty cavity reflects with unit modulus") {
  const double kappa = 1e9;
  const TimeGrid grid(0.0, 1e-11, 40001);
  const auto e = gaussian(grid, 200e-9, 40e-9);
  const auto r = simulate_full(e, Schedule(std::vector<Segment>{}), no_delta, {kappa, 0.0});
  // after the 1/kappa transient the output follows the input to O(E'/kappa)
  double worst = 0.0;
  for (std::size_t k = grid.nearest(20e-9); k < grid.size(); ++k)
    worst = std::max(worst, std::abs(std::abs(r.e_out[k]) - std::abs(e[k])));
  const double peak = std::abs(e[grid.nearest(200e-9)]);
  CHECK(worst < 0.05 * peak);
  CHECK(r.ledger.output_energy == doctest::Approx(r.ledger.input_energy).epsilon(1e-3));
}

TEST_CASE("full model approaches the adiabatic model as kappa grows") {
  const TimeGrid grid(0.0, 4e-12, 250001);
  auto discrepancy = [&](double kappa, double tau_w, bool optimal) {
    const double g0 = std::sqrt(tau_w * kappa / 1e-6);
    const Schedule g = Schedule::square(0.0, 1e-6, g0);
    const CavityParams p{kappa, 0.0};
    const auto e = optimal ? optimal_write_input(g, p, grid) : gaussian(grid, 600e-9, 200e-9);
    const auto full = simulate_full(e, g, no_delta, p);
    const auto adia = simulate_adiabatic(e, g, no_delta, p);
    return std::pair{std::abs(*full.ledger.eta_w - *adia.ledger.eta_w) / *adia.ledger.eta_w, g0 * g0 / (kappa * kappa)};
  };
  SUBCASE("optimal input: below (g/kappa)^2") {
    for (double kappa : {5e9, 1e10, 2e10}) {
      const auto [rel, small] = discrepancy(kappa, 3.0, true);
      CHECK(rel < small);
    }
  }
  SUBCASE("gaussian input: first order in (g/kappa)^2") {
    std::vector<double> err;
    for (double kappa : {5e9, 1e10, 2e10}) {
      const auto [rel, small] = discrepancy(kappa, 2.0, false);
      CHECK(rel < 3.0 * small);
      err.push_back(rel);
    }
    CHECK(std::log2(err[0] / err[1]) >= 1.0);
    CHECK(std::log2(err[1] / err[2]) >= 1.0);
  }
}

TEST_CASE("full model stability guard") {
  const TimeGrid grid(0.0, 1e-9, 11);
  CHECK_THROWS_AS(simulate_full(FieldEnvelope::zeros(grid), Schedule::square(0.0, 1e-8, 1e7), no_delta, {1e9, 0.0}),
                  StabilityError);
  CHECK_THROWS_AS(
      simulate_adiabatic(FieldEnvelope::zeros(grid), Schedule::square(0.0, 1e-8, 1e8), no_delta, {1e6, 0.0}),
      StabilityError);
}

TEST_CASE("adiabatic read decays as exp(-tau)") {
  const CavityParams p{1e9, 0.0};
  const TimeGrid grid(0.0, 1e-10, 3001);
  const Schedule g = Schedule::gaussian(150e-9, 40e-9, 5e7, 140e-9);
  SimOptions opt;
  opt.initial.sigma = 1.0;
  const auto r = simulate_adiabatic(FieldEnvelope::zeros(grid), g, no_delta, p, opt);
  // tau(t) of the truncated gaussian in closed form
  auto tau = [&](double t) {
    const double a = std::clamp(t, 10e-9, 290e-9);
    const double w = 40e-9;
    return 5e7 * 5e7 / p.kappa * w * std::sqrt(M_PI) / 2.0 * (std::erf((a - 150e-9) / w) + std::erf(140e-9 / w));
  };
  for (std::size_t k = 0; k < grid.size(); k += 10) CHECK(std::abs(r.sigma[k] - std::exp(-tau(grid.time(k)))) < 1e-8);
}

TEST_CASE("adiabatic continuity holds pointwise") {
  const CavityParams p{1e9, 0.0};
  const TimeGrid grid(0.0, 1e-10, 4001);
  const Schedule g = Schedule::square(50e-9, 350e-9, 3e7);
  const auto r = simulate_adiabatic(gaussian(grid, 200e-9, 25e-9), g, no_delta, p);
  CHECK(r.continuity_residual < 1e-8);
  CHECK(*r.ledger.eta_w + r.ledger.leakage == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("constant detuning and no coupling: free decay") {
  const CavityParams p{1e9, 2e6};
  const double d0 = 3e7;
  const TimeGrid grid(0.0, 1e-10, 2001);
  SimOptions opt;
  opt.initial.sigma = cplx(0.6, 0.8);
  const auto r = simulate_adiabatic(FieldEnvelope::zeros(grid), Schedule(std::vector<Segment>{}),
                                    Schedule({SquarePulse{0.0, 1e-6, d0}}, ScheduleRole::detuning), p, opt);
  for (std::size_t k = 0; k < grid.size(); k += 100) {
    const double t = grid.time(k);
    CHECK(std::abs(r.sigma[k] - opt.initial.sigma * std::exp(-(p.gamma + I * d0) * t)) < 1e-10);
  }
}

TEST_CASE("energy bound with decay") {
  const CavityParams p{1e9, 3e5};
  const TimeGrid grid(0.0, 1e-10, 4001);
  const Schedule g = Schedule::gaussian(200e-9, 60e-9, 3e7, 200e-9);
  const auto r = simulate_adiabatic(gaussian(grid, 180e-9, 40e-9), g, no_delta, p);
  const auto& L = r.ledger;
  CHECK(*L.eta_w + L.leakage + L.decay_loss_write == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(*L.eta_w <= 1.0);
}

TEST_CASE("excitation never exceeds one") {
  const CavityParams p{1e9, 0.0};
  const TimeGrid grid(0.0, 1e-11, 40001);
  const Schedule g = Schedule::square(50e-9, 350e-9, 3e7);
  const auto r = simulate_full(gaussian(grid, 200e-9, 40e-9), g, no_delta, p);
  for (double x : r.excitation) CHECK(x <= 1.0 + 1e-9);
}

TEST_CASE("analytic read efficiency") {
  const CavityParams p{1e9, 0.0};
  const TimeGrid grid(0.0, 1e-10, 3001);

  SUBCASE("tau_r = 1") {
    const double g0 = std::sqrt(p.kappa / 200e-9);
    const auto r = read_analytic(1.0, Schedule::square(50e-9, 250e-9, g0), p, grid);
    CHECK(*r.ledger.eta_r == doctest::Approx(0.864665).epsilon(1e-6));
    CHECK(*r.ledger.eta_r == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
    CHECK(continuity_residual(r) < 1e-8);
  }
  SUBCASE("no coupling emits nothing") {
    const auto r = read_analytic(1.0, Schedule(std::vector<Segment>{}), p, grid);
    CHECK(r.ledger.emitted_read == 0.0);
    CHECK(r.ledger.eta_r.value_or(0.0) == 0.0);
  }
  SUBCASE("shape independence") {
    const Schedule sq = Schedule::square(20e-9, 220e-9, std::sqrt(1.5 * p.kappa / 200e-9));
    const Schedule ga0 = Schedule::gaussian(150e-9, 40e-9, 1.0, 140e-9);
    const double tau0 = effective_time(ga0, p.kappa, grid).total();
    const Schedule ga = ga0.scaled(std::sqrt(1.5 / tau0));
    SimOptions opt;
    opt.initial.sigma = 1.0;
    const auto a = simulate_adiabatic(FieldEnvelope::zeros(grid), sq, no_delta, p, opt);
    const auto b = simulate_adiabatic(FieldEnvelope::zeros(grid), ga, no_delta, p, opt);
    CHECK(std::abs(*a.ledger.eta_r - *b.ledger.eta_r) < 1e-8);
  }
}

TEST_CASE("square pulse closed form") {
  const CavityParams p0{1e9, 0.0};
  CHECK(square_pulse_efficiency(2e7, 1e-6, p0) == doctest::Approx(1.0 - std::exp(-2.0 * 4e5 * 1e-6)));

  const double g0 = 2e7, r = g0 * g0 / 1e9;
  const CavityParams p1{1e9, r};  // C = 1
  CHECK(square_pulse_efficiency(g0, 1e-3, p1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(square_pulse_efficiency(g0, 1.0 / (2.0 * r), p1) == doctest::Approx(0.5 * (1.0 - std::exp(-2.0))));
  CHECK(square_pulse_efficiency(0.0, 1e-6, p1) == 0.0);
  CHECK_THROWS_AS(square_pulse_efficiency(-1.0, 1e-6, p1), ParameterError);
}

TEST_CASE("continuity residual") {
  SUBCASE("zero fields") {
    const TimeGrid grid(0.0, 1e-9, 11);
    const auto r = simulate_adiabatic(FieldEnvelope::zeros(grid), Schedule(std::vector<Segment>{}), no_delta, {1e9, 0.0});
    CHECK(continuity_residual(r) == 0.0);
  }
  SUBCASE("shrinks at least quadratically under refinement") {
    const CavityParams p{2e8, 0.0};
    const Schedule g = Schedule::square(0.0, 200e-9, 2e7);
    std::vector<double> res;
    // kappa dt <= 0.025 here, so every cell is a single RK4 step
    for (double dt : {1e-10, 5e-11, 2.5e-11}) {
      const TimeGrid grid(0.0, dt, static_cast<std::size_t>(std::lround(300e-9 / dt)) + 1);
      res.push_back(simulate_full(gaussian(grid, 100e-9, 30e-9), g, no_delta, p).continuity_residual);
    }
    CHECK(std::log2(res[0] / res[1]) >= 2.0);
    CHECK(std::log2(res[1] / res[2]) >= 2.0);
  }
  SUBCASE("coarse grids are substepped") {
    const CavityParams p{1e9, 0.0};
    const Schedule g = Schedule::square(20e-9, 200e-9, 1e8);
    const TimeGrid grid(0.0, 1e-10, 3001);
    CHECK(simulate_full(gaussian(grid, 100e-9, 30e-9), g, no_delta, p).continuity_residual < 1e-8);
  }
}

TEST_CASE("effective-time equation of motion") {
  // d sigma / d tau = -sigma + i sqrt(2) E_in_eff
  const CavityParams p{1e9, 0.0};
  const TimeGrid grid(0.0, 1e-10, 4001);
  const Schedule g = Schedule::gaussian(200e-9, 60e-9, 4e7, 200e-9);
  const auto e = gaussian(grid, 190e-9, 40e-9);
  const auto r = simulate_adiabatic(e, g, no_delta, p);
  const auto eff = to_effective(e, g, p.kappa, FieldRole::input);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 1; i + 1 < eff.size(); ++i) {
    const std::size_t k = eff.index[i];
    if (eff.index[i - 1] != k - 1 || eff.index[i + 1] != k + 1) continue;
    const double dtau = eff.tau[i + 1] - eff.tau[i - 1];
    if (dtau < 1e-4) continue;
    const cplx lhs = (r.sigma[k + 1] - r.sigma[k - 1]) / dtau;
    const cplx rhs = -r.sigma[k] + I * std::sqrt(2.0) * eff.value[i];
    worst = std::max(worst, std::abs(lhs - rhs));
    scale = std::max(scale, std::abs(rhs));
  }
  CHECK(worst < 1e-3 * scale);
}
