// Acceptance criteria 1-10. One PASS/FAIL line per criterion; exit status is
// the number of failures.

#include "dipmem/cavity.hpp"
#include "dipmem/control.hpp"
#include "dipmem/effective.hpp"
#include "dipmem/freespace.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

using namespace dipmem;

namespace {

const Schedule no_delta{std::vector<Segment>{}, ScheduleRole::detuning};

int failures = 0;
// worst continuity residual over every gamma = 0 cavity run below
double worst_continuity = 0.0;
std::string worst_continuity_at;
// worst free-space ledger closure over every free-space run below
double worst_ledger = 0.0;
std::string worst_ledger_at;
// ledger closure on the deliberately coarse refinement grids, reported only
std::string coarse_ledgers;
std::string current = "?";

void note_ledger(double residual) {
  if (residual > worst_ledger) {
    worst_ledger = residual;
    worst_ledger_at = current;
  }
}

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void verdict(int id, bool ok, const std::string& what, const std::string& detail, double secs) {
  if (!ok) ++failures;
  std::cout << fmt::format("{} criterion {:>2}: {} | {} | {:.2f} s", ok ? "PASS" : "FAIL", id, what, detail, secs)
            << std::endl;
}

SimResult track(SimResult r) {
  if (r.continuity_residual > worst_continuity) {
    worst_continuity = r.continuity_residual;
    worst_continuity_at = current;
  }
  return r;
}

/// Effective time by Gauss-Kronrod between the given split points; the
/// integrand is smooth (polynomial for piecewise cubics) on each piece.
double tau_quadrature(const Schedule& g, double kappa, std::vector<double> cuts) {
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (!(b > a)) continue;
    sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double t) {
          const double v = g.on_interval(t, a, b);
          return v * v;
        },
        a, b, 10, 1e-12);
  }
  return sum / kappa;
}

/// Random coupling shape of unit peak together with its smoothness breakpoints.
struct Shape {
  Schedule g;
  std::vector<double> cuts;
  std::string kind;
};

Shape random_shape(std::mt19937_64& rng, int kind, double t0, double t1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double span = t1 - t0;
  switch (kind) {
    case 0: {
      const double a = t0 + 0.2 * span * u(rng), b = t1 - 0.2 * span * u(rng);
      return {Schedule::square(a, b, 1.0), {t0, a, b, t1}, "square"};
    }
    case 1: {
      const double c = t0 + span * (0.4 + 0.2 * u(rng)), w = span * (0.05 + 0.1 * u(rng));
      const double h = std::min({3.0 * w, c - t0, t1 - c});
      return {Schedule::gaussian(c, w, 1.0, h), {t0, c - h, c, c + h, t1}, "gaussian"};
    }
    case 2: {
      const int n = 6 + static_cast<int>(5 * u(rng));
      std::vector<double> ts, vs;
      for (int i = 0; i < n; ++i) {
        ts.push_back(t0 + span * (0.05 + 0.9 * i / (n - 1.0)));
        vs.push_back(0.2 + 0.8 * u(rng));
      }
      auto cuts = ts;
      cuts.push_back(t0);
      cuts.push_back(t1);
      return {Schedule::tabulated(ts, vs), cuts, "tabulated"};
    }
    case 3: {
      std::vector<double> ts{t0 + 0.1 * span}, vs{0.0};
      for (int i = 1; i < 4; ++i) {
        ts.push_back(t0 + span * (0.1 + 0.2 * i + 0.05 * u(rng)));
        vs.push_back(0.3 + 0.7 * u(rng));
      }
      ts.push_back(t0 + 0.95 * span);
      vs.push_back(0.0);
      auto cuts = ts;
      cuts.push_back(t0);
      cuts.push_back(t1);
      return {Schedule({PiecewiseLinear{ts, vs}}), cuts, "piecewise-linear"};
    }
    default: {
      // square followed by a gaussian
      const double a = t0 + 0.05 * span, b = t0 + span * (0.3 + 0.1 * u(rng));
      const double c = t0 + 0.7 * span, w = 0.08 * span, h = 0.2 * span;
      const double amp = 0.5 + 0.5 * u(rng);
      Schedule g({SquarePulse{a, b, amp}, GaussianPulse{c - h, c + h, c, w, 1.0}});
      return {g, {t0, a, b, c - h, c, c + h, t1}, "square+gaussian"};
    }
  }
}

TimeGrid grid_over(double t0, double t1, std::size_t n) {
  return TimeGrid(t0, (t1 - t0) / static_cast<double>(n - 1), n);
}

FieldEnvelope random_envelope(std::mt19937_64& rng, const TimeGrid& grid, int kind, const FieldEnvelope& near) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = grid.size();
  std::vector<cplx> s(n);
  const double t0 = grid.t0(), span = grid.t_end() - grid.t0();
  switch (kind) {
    case 0:  // white noise
      for (auto& v : s) v = cplx(nd(rng), nd(rng));
      break;
    case 1: {  // smooth random Fourier series
      std::vector<cplx> c(8);
      for (auto& v : c) v = cplx(nd(rng), nd(rng));
      for (std::size_t k = 0; k < n; ++k) {
        const double x = (grid.time(k) - t0) / span;
        for (std::size_t m = 0; m < c.size(); ++m) s[k] += c[m] * std::exp(cplx(0.0, 2.0 * M_PI * m * x));
      }
      break;
    }
    case 2: {  // chirped gaussian
      const double c0 = t0 + span * u(rng), w = span * (0.03 + 0.4 * u(rng)), chirp = 20.0 * (u(rng) - 0.5);
      for (std::size_t k = 0; k < n; ++k) {
        const double x = (grid.time(k) - c0) / w;
        s[k] = std::exp(cplx(-0.5 * x * x, chirp * x * x));
      }
      break;
    }
    default: {  // small perturbation of the optimum
      const double eps = 1e-3 + 0.2 * u(rng);
      for (std::size_t k = 0; k < n; ++k) s[k] = near[k];
      const double scale = std::sqrt(near.norm() / span);
      for (auto& v : s) v += eps * scale * cplx(nd(rng), nd(rng));
      break;
    }
  }
  return FieldEnvelope(grid, s).normalized();
}

// ---------------------------------------------------------------------------

void criterion_read_law() {
  Stopwatch sw;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t0 = 0.0, t1 = 300e-9;
  // full model at the edge of its validity: kappa = 100 g_peak^2 / kappa
  const double ratio = 0.1;
  double worst_ad = 0.0, worst_full = 0.0;
  std::string worst_kind;
  for (int i = 0; i < 10; ++i) {
    const Shape sh = random_shape(rng, i % 5, t0, t1);
    const double tau_target = 0.1 + 3.9 * u(rng);
    const double unit = tau_quadrature(sh.g, 1.0, sh.cuts);  // int f^2 dt

    // adiabatic: kappa fixed, amplitude scaled to the target
    {
      const CavityParams p{1e9, 0.0};
      const double amp = std::sqrt(tau_target * p.kappa / unit);
      const Schedule g = sh.g.scaled(amp);
      const double tau = tau_quadrature(g, p.kappa, sh.cuts);
      const TimeGrid grid = grid_over(t0, t1 + 20e-9, 8001);
      SimOptions opt;
      opt.initial.sigma = 1.0;
      const auto r = track(simulate_adiabatic(FieldEnvelope::zeros(grid), g, no_delta, p, opt));
      const double law = 1.0 - std::exp(-2.0 * tau);
      const double rel = std::abs(*r.ledger.eta_r - law) / law;
      if (rel > worst_ad) worst_ad = rel;
    }
    // full: kappa chosen so that tau hits the target with g_peak = ratio * kappa
    {
      const double kappa = tau_target / (ratio * ratio * unit);
      const CavityParams p{kappa, 0.0};
      const Schedule g = sh.g.scaled(ratio * kappa);
      const double tau = tau_quadrature(g, p.kappa, sh.cuts);
      // room for the cavity to empty after the coupling switches off
      const double t_end = t1 + 40.0 / kappa;
      const auto n = static_cast<std::size_t>(std::ceil((t_end - t0) * kappa / 0.1)) + 1;
      const TimeGrid grid = grid_over(t0, t_end, n);
      SimOptions opt;
      opt.initial.sigma = 1.0;
      const auto r = track(simulate_full(FieldEnvelope::zeros(grid), g, no_delta, p, opt));
      const double law = 1.0 - std::exp(-2.0 * tau);
      const double rel = std::abs(*r.ledger.eta_r - law) / law;
      if (rel > worst_full) {
        worst_full = rel;
        worst_kind = sh.kind;
      }
    }
  }
  const double secs = sw.seconds();
  verdict(1, worst_ad < 1e-6 && worst_full < 1e-3 && secs < 10.0, "read efficiency follows 1 - exp(-2 tau_r)",
          fmt::format("10 schedules, max rel err adiabatic {:.2e} (tol 1e-6), full {:.2e} at g/kappa={} "
                      "(tol 1e-3, worst {}), runtime limit 10 s",
                      worst_ad, worst_full, ratio, worst_kind),
          secs);
}

void criterion_shape_independence() {
  Stopwatch sw;
  const CavityParams p{1e9, 0.0};
  const double tau_r = 1.3;
  const double t1 = 300e-9;
  // square over [0, t1]
  const double a_sq = std::sqrt(tau_r * p.kappa / t1);
  // gaussian truncated at +-3w: int g^2 = A^2 w sqrt(pi) erf(3)
  const double c = 150e-9, w = 40e-9, h = 120e-9;
  const double a_g = std::sqrt(tau_r * p.kappa / (w * std::sqrt(M_PI) * std::erf(h / w)));
  const TimeGrid grid = grid_over(0.0, 320e-9, 6401);
  SimOptions opt;
  opt.initial.sigma = 1.0;
  const auto sq = track(simulate_adiabatic(FieldEnvelope::zeros(grid), Schedule::square(0.0, t1, a_sq), no_delta, p, opt));
  const auto ga =
      track(simulate_adiabatic(FieldEnvelope::zeros(grid), Schedule::gaussian(c, w, a_g, h), no_delta, p, opt));
  const double diff = std::abs(*sq.ledger.eta_r - *ga.ledger.eta_r);
  verdict(2, diff < 1e-8, "square and gaussian read at equal tau_r",
          fmt::format("eta_r {:.12f} vs {:.12f}, |diff| {:.2e} (tol 1e-8)", *sq.ledger.eta_r, *ga.ledger.eta_r, diff),
          sw.seconds());
}

void criterion_write_optimality() {
  Stopwatch sw;
  const CavityParams p{1e9, 0.0};
  const double c = 150e-9, w = 50e-9, h = 150e-9, tau_w = 1.4;
  const double amp = std::sqrt(tau_w * p.kappa / (w * std::sqrt(M_PI) * std::erf(h / w)));
  const Schedule g = Schedule::gaussian(c, w, amp, h);
  const TimeGrid grid = grid_over(0.0, 300e-9, 3001);
  const FieldEnvelope best = optimal_write_input(g, p, grid);
  const double eta_opt = *track(simulate_adiabatic(best, g, no_delta, p)).ledger.eta_w;
  const double bound = 1.0 - std::exp(-2.0 * tau_w);

  std::mt19937_64 rng(2002);
  int beaten = 0;
  double runner_up = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto e = random_envelope(rng, grid, trial % 4, best);
    const double eta = *track(simulate_adiabatic(e, g, no_delta, p)).ledger.eta_w;
    if (eta < eta_opt) ++beaten;
    runner_up = std::max(runner_up, eta);
  }
  const double err = std::abs(eta_opt - bound);
  verdict(3, beaten == 1000 && err < 1e-6, "optimal write envelope",
          fmt::format("beats {}/1000 random envelopes (best random {:.9f} < {:.9f}); |eta_w - bound| {:.2e} (tol 1e-6)",
                      beaten, runner_up, eta_opt, err),
          sw.seconds());
}

void criterion_reversal() {
  Stopwatch sw;
  const CavityParams p{1e9, 0.0};
  const double tau = 2.0;
  // write with a gaussian coupling, read with a square one of equal tau
  const double c = 150e-9, w = 50e-9, h = 150e-9;
  const Schedule gw = Schedule::gaussian(c, w, std::sqrt(tau * p.kappa / (w * std::sqrt(M_PI) * std::erf(h / w))), h);
  const Schedule gr = Schedule::square(0.0, 200e-9, std::sqrt(tau * p.kappa / 200e-9));
  const TimeGrid wgrid = grid_over(0.0, 300e-9, 3001);
  const TimeGrid rgrid = grid_over(0.0, 200e-9, 2001);

  const FieldEnvelope e_in = optimal_write_input(gw, p, wgrid);
  const auto wr = track(simulate_adiabatic(e_in, gw, no_delta, p));
  SimOptions opt;
  opt.initial.sigma = wr.sigma.back();
  const auto rd = track(simulate_adiabatic(FieldEnvelope::zeros(rgrid), gr, no_delta, p, opt));

  const auto a = to_effective(e_in, gw, p.kappa, FieldRole::input);
  const auto b = to_effective(rd.e_out, gr, p.kappa, FieldRole::output);
  const double ov = tau_overlap(a, b, TauAlignment::reversed);
  verdict(4, ov > 1.0 - 1e-8, "read output is the tau-reversed optimal write envelope",
          fmt::format("tau overlap {:.14f}, 1 - overlap {:.2e} (tol 1e-8)", ov, 1.0 - ov), sw.seconds());
}

void criterion_synthesis() {
  Stopwatch sw;
  const CavityParams p{1e9, 0.0};
  const double eta_w = 0.9, eta_r = 0.9, storage = 600e-9;
  const TimeGrid grid = grid_over(0.0, 1300e-9, 13001);
  // gaussian input, amplitude FWTM 200 ns centred at 200 ns, cut at +-FWTM
  const double fwtm = 200e-9, sigma_t = fwtm / (2.0 * std::sqrt(2.0 * std::log(10.0)));
  std::vector<cplx> s(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = (grid.time(k) - 200e-9) / sigma_t;
    if (std::abs(grid.time(k) - 200e-9) <= fwtm) s[k] = std::exp(-0.5 * x * x);
  }
  const FieldEnvelope e_in = FieldEnvelope(grid, s).normalized();
  const auto pair = synthesize_couplings(e_in, storage, eta_w, eta_r, p);
  const auto r = track(simulate_adiabatic(e_in, Schedule::concat(pair.write, pair.read), no_delta, p));

  // compare on the read window against the delayed input
  const std::size_t lag = static_cast<std::size_t>(std::llround(storage / grid.dt()));
  const std::size_t from = *r.ledger.read_start;
  cplx cross = 0.0;
  double nt = 0.0, no = 0.0;
  for (std::size_t k = from; k < grid.size(); ++k) {
    const cplx target = k >= lag ? e_in[k - lag] : cplx(0.0);
    const double wk = (k == from || k + 1 == grid.size()) ? 0.5 : 1.0;
    cross += wk * std::conj(target) * r.e_out[k];
    nt += wk * std::norm(target);
    no += wk * std::norm(r.e_out[k]);
  }
  const double overlap = std::abs(cross) / std::sqrt(nt * no);
  const double ratio = *r.ledger.eta_tot;
  verdict(5, overlap > 0.999 && std::abs(ratio - eta_w * eta_r) < 1e-3, "coupling synthesis for a gaussian pulse",
          fmt::format("shape overlap {:.10f} (tol > 0.999), energy ratio {:.8f} (target 0.81 +- 1e-3)", overlap, ratio),
          sw.seconds());
}

void criterion_decay() {
  Stopwatch sw;
  const double kappa = 1e9, g0 = 2e7, rate = g0 * g0 / kappa;
  double worst_formula = 0.0, worst_asym = 0.0;
  for (double C : {0.5, 1.0, 10.0, 100.0}) {
    const CavityParams p{kappa, rate / C};
    const double total = rate + p.gamma;
    // eq: eta = rate / (rate + gamma) (1 - exp(-2 (rate + gamma) t))
    auto formula = [&](double t) { return rate / total * (1.0 - std::exp(-2.0 * total * t)); };
    for (double t : {0.5 / total, 1.0 / total, 10.0 / total}) {
      const Schedule g = Schedule::square(0.0, t, g0);
      const TimeGrid grid = grid_over(0.0, t, 4001);
      const double w = *simulate_adiabatic(optimal_write_input(g, p, grid), g, no_delta, p).ledger.eta_w;
      SimOptions opt;
      opt.initial.sigma = 1.0;
      const TimeGrid rgrid = grid_over(0.0, t * 1.001, 4005);
      const double r = *simulate_adiabatic(FieldEnvelope::zeros(rgrid), g, no_delta, p, opt).ledger.eta_r;
      worst_formula = std::max({worst_formula, std::abs(w - formula(t)), std::abs(r - formula(t))});
      if (t == 10.0 / total)
        worst_asym = std::max({worst_asym, std::abs(w - C / (C + 1.0)), std::abs(r - C / (C + 1.0))});
    }
  }
  verdict(6, worst_formula < 1e-5 && worst_asym < 1e-4, "square-pulse efficiencies with atomic decay",
          fmt::format("C in {{0.5, 1, 10, 100}}: max |sim - formula| {:.2e} (tol 1e-5), max |eta - C/(C+1)| at 10 "
                      "time constants {:.2e} (tol 1e-4)",
                      worst_formula, worst_asym),
          sw.seconds());
}

void criterion_detuning() {
  Stopwatch sw;
  const CavityParams p{1e9, 0.0};
  const double c = 150e-9, w = 50e-9, h = 150e-9, tau_w = 1.2;
  const Schedule g = Schedule::gaussian(c, w, std::sqrt(tau_w * p.kappa / (w * std::sqrt(M_PI) * std::erf(h / w))), h);
  const TimeGrid grid = grid_over(0.0, 300e-9, 12001);
  const FieldEnvelope best = optimal_write_input(g, p, grid);
  const double eta0 = *track(simulate_adiabatic(best, g, no_delta, p)).ledger.eta_w;
  const double t_ref = coupling_window(g, grid).t_end;

  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0, worst_plain = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> ts, vs;
    for (int i = 0; i < 9; ++i) {
      ts.push_back(300e-9 * i / 8.0);
      vs.push_back(2.0 * M_PI * 30e6 * u(rng));
    }
    const Schedule delta = Schedule::tabulated(ts, vs, ScheduleRole::detuning);
    const auto comp = compensate_detuning(best, delta, t_ref);
    const double eta = *track(simulate_adiabatic(comp, g, delta, p)).ledger.eta_w;
    const double plain = *track(simulate_adiabatic(best, g, delta, p)).ledger.eta_w;
    worst = std::max(worst, std::abs(eta - eta0));
    worst_plain = std::max(worst_plain, std::abs(plain - eta0));
  }
  verdict(7, worst < 1e-6, "detuning compensation restores the resonant write efficiency",
          fmt::format("5 tabulated detuning profiles: max |eta_w - eta_w(0)| {:.2e} (tol 1e-6); uncompensated "
                      "loss up to {:.3f}",
                      worst, worst_plain),
          sw.seconds());
}

FreeSpaceFields fs_case(std::size_t n, bool analytic) {
  current = fmt::format("{}x{} {} fields", n, n, analytic ? "analytic" : "numeric");
  const MediumParams m{0.01, 5e4};
  const TimeGrid grid = grid_over(0.0, 400e-9, n);
  const Schedule g = Schedule::square(0.0, 400e-9, std::sqrt(5.0 * m.c / (m.length * 400e-9)));
  std::vector<cplx> s(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = (grid.time(k) - 150e-9) / 40e-9;
    s[k] = std::exp(cplx(-0.5 * x * x, 0.3 * x));
  }
  const FieldEnvelope e = FieldEnvelope(grid, s).normalized();
  SpinWave s0 = SpinWave::zeros(m.length, n);
  for (std::size_t j = 0; j < n; ++j) s0.samples[j] = cplx(0.3, 0.1) * std::sin(M_PI * s0.z(j) / m.length);
  auto f = analytic ? analytic_evolution(e, s0, g, no_delta, m) : numeric_evolution(e, s0, g, no_delta, m);
  if (n >= 200)
    note_ledger(f.ledger.balance_residual);
  else
    coarse_ledgers += fmt::format("{}{}: {:.1e}", coarse_ledgers.empty() ? "" : ", ", current, f.ledger.balance_residual);
  return f;
}

void criterion_freespace_oracle() {
  Stopwatch sw;
  const double err200 = max_relative_difference(fs_case(200, true), fs_case(200, false));
  std::vector<double> errs;
  const std::vector<std::size_t> ns{50, 100, 200, 400};
  for (std::size_t n : ns) errs.push_back(max_relative_difference(fs_case(n, true), fs_case(n, false)));
  double order = 1e9;
  std::string orders;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    // grids refine by (n-1) ratios close to 2
    const double h = static_cast<double>(ns[i + 1] - 1) / static_cast<double>(ns[i] - 1);
    const double o = std::log(errs[i] / errs[i + 1]) / std::log(h);
    order = std::min(order, o);
    orders += fmt::format("{}{:.2f}", i ? "," : "", o);
  }
  const double secs = sw.seconds();
  verdict(8, err200 < 1e-3 && order >= 1.8 && secs < 60.0, "free-space analytic kernel vs integrator",
          fmt::format("200x200 max rel diff {:.2e} (tol 1e-3); observed orders {} (min {:.2f}, tol >= 1.8); "
                      "runtime limit 60 s",
                      err200, orders, order),
          secs);
}

void criterion_depth_sweep() {
  Stopwatch sw;
  const std::vector<double> d{0, 30, 100, 200, 300, 500, 1000, 2000, 5000, 1e4, 2e4, 3e4, 5e4, 7e4, 1e5};
  FreeSpaceScenario s;  // 1 cm, gamma 5e4 rad/s
  const auto rows = storage_retrieval_sweep(s, d);
  const double sweep_secs = sw.seconds();
  FreeSpaceScenario s2 = s;
  s2.medium.gamma = 2.0 * s.medium.gamma;
  const auto rows2 = storage_retrieval_sweep(s2, {d.back()});

  std::size_t peak = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].eta_forward > rows[peak].eta_forward) peak = i;
  const bool interior = peak > 0 && peak + 1 < rows.size() && rows[peak].eta_forward > rows.front().eta_forward &&
                        rows[peak].eta_forward > rows.back().eta_forward;
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].eta_backward >= rows[i - 1].eta_backward;
  const double sat = rows.back().eta_backward;
  const double last_step = sat - rows[rows.size() - 2].eta_backward;
  const bool saturating = sat < 1.0 && last_step < 0.01 * sat;
  const bool lower = rows2.front().eta_backward < sat;

  std::string fwd, bwd;
  for (const auto& r : rows) {
    fwd += fmt::format("{}{:.4f}", fwd.empty() ? "" : ",", r.eta_forward);
    bwd += fmt::format("{}{:.4f}", bwd.empty() ? "" : ",", r.eta_backward);
  }
  std::cout << "  d: 0,30,100,200,300,500,1e3,2e3,5e3,1e4,2e4,3e4,5e4,7e4,1e5\n  forward:  " << fwd
            << "\n  backward: " << bwd << std::endl;
  verdict(9, interior && monotone && saturating && lower && sweep_secs < 300.0, "optical-depth sweep properties",
          fmt::format("forward peak {:.4f} at d={} (interior: {}); backward non-decreasing: {}; saturates at "
                      "{:.4f} < 1 (last step {:.1e}); doubled gamma gives {:.4f} (lower: {}); sweep {:.1f} s "
                      "(limit 300 s)",
                      rows[peak].eta_forward, rows[peak].d, interior, monotone, sat, last_step,
                      rows2.front().eta_backward, lower, sweep_secs),
          sw.seconds());
}

void criterion_conservation() {
  Stopwatch sw;
  // every cavity run above with gamma = 0 was tracked; add free-space memories
  // at their automatic resolution
  FreeSpaceScenario s;
  for (double depth : {30.0, 300.0, 3000.0, 30000.0})
    for (bool backward : {false, true}) {
      current = fmt::format("memory d={} {}", depth, backward ? "backward" : "forward");
      const auto m = run_memory(s, depth, backward, false);
      note_ledger(m.write.ledger.balance_residual);
      note_ledger(m.read.ledger.balance_residual);
    }
  verdict(10, worst_continuity < 1e-6 && worst_ledger < 1e-4, "energy conservation",
          fmt::format("max cavity continuity residual {:.2e} (tol 1e-6, {}); max free-space ledger residual {:.2e} "
                      "(tol 1e-4, {}); refinement-study grids below production resolution: {}",
                      worst_continuity, worst_continuity_at, worst_ledger, worst_ledger_at, coarse_ledgers),
          sw.seconds());
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{
      criterion_read_law,   criterion_shape_independence, criterion_write_optimality, criterion_reversal,
      criterion_synthesis,  criterion_decay,              criterion_detuning,         criterion_freespace_oracle,
      criterion_depth_sweep, criterion_conservation};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    current = fmt::format("criterion {}", i + 1);
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL (exception) " << e.what() << std::endl;
    }
  }
  std::cout << fmt::format("{} of 10 criteria passed", 10 - failures) << std::endl;
  return failures == 0 ? 0 : 1;
}
