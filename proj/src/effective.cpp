#include "dipmem/effective.hpp"

#include "dipmem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace dipmem {

std::vector<double> accumulate_squared(const Schedule& g, double scale, const TimeGrid& grid) {
  const auto bps = g.breakpoints();
  std::vector<double> acc(grid.size(), 0.0);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double a = grid.time(k), b = grid.time(k + 1);
    const auto pts = split_points(a, b, bps);
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
      const double lo = pts[j], hi = pts[j + 1];
      const double ga = g.on_interval(lo, lo, hi), gb = g.on_interval(hi, lo, hi);
      s += 0.5 * (hi - lo) * (ga * ga + gb * gb);
    }
    acc[k + 1] = acc[k] + scale * s;
  }
  return acc;
}

EffectiveTime effective_time(const Schedule& g, double kappa, const TimeGrid& grid) {
  if (!(kappa > 0.0)) throw ParameterError(fmt::format("kappa must be positive (got {})", kappa));
  return EffectiveTime{grid, accumulate_squared(g, 1.0 / kappa, grid)};
}

double EffectiveEnvelope::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < value.size(); ++i)
    s += 0.5 * (tau[i + 1] - tau[i]) * (std::norm(value[i]) + std::norm(value[i + 1]));
  return s;
}

namespace {
double role_power(FieldRole role) { return role == FieldRole::cavity ? 1.0 : 0.5; }

// g at a grid point; where g is off exactly at the point, the one-sided limit
// from an adjacent cell (a pulse edge landing on the sample)
double point_value(const Schedule& g, const TimeGrid& grid, std::size_t k) {
  const double t = grid.time(k);
  const double v = g(t);
  if (v > g.zero_threshold()) return v;
  double side = 0.0;
  if (k > 0) side = g.on_interval(t, t - grid.dt(), t);
  if (side <= g.zero_threshold() && k + 1 < grid.size()) side = g.on_interval(t, t, t + grid.dt());
  return side > g.zero_threshold() ? side : v;
}

}  // namespace

EffectiveEnvelope to_effective(const FieldEnvelope& e, const Schedule& g, double kappa,
                               FieldRole role) {
  if (!(kappa > 0.0)) throw ParameterError(fmt::format("kappa must be positive (got {})", kappa));
  const TimeGrid& grid = e.grid();
  const auto tau = effective_time(g, kappa, grid).tau;
  const double thr = g.zero_threshold();
  const double kfac = std::pow(kappa, role_power(role));

  EffectiveEnvelope out;
  out.role = role;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    const double gv = point_value(g, grid, k);
    if (!(gv > thr)) {
      if (e[k] != 0.0)
        throw SingularTransformError(
            fmt::format("coupling vanishes at t={} s where the field is nonzero", t), t);
      continue;
    }
    out.index.push_back(k);
    out.t.push_back(t);
    out.tau.push_back(tau[k]);
    out.value.push_back(e[k] * (kfac / gv));
  }
  return out;
}

FieldEnvelope from_effective(const EffectiveEnvelope& eff, const Schedule& g, double kappa,
                             const TimeGrid& grid) {
  if (!(kappa > 0.0)) throw ParameterError(fmt::format("kappa must be positive (got {})", kappa));
  const double kfac = std::pow(kappa, role_power(eff.role));
  std::vector<cplx> s(grid.size(), 0.0);
  if (eff.size() == 0) return FieldEnvelope(grid, std::move(s));
  std::size_t lo = grid.size(), hi = 0;
  for (std::size_t i = 0; i < eff.size(); ++i) {
    const std::size_t k = grid.nearest(eff.t[i]);
    s[k] = eff.value[i] * (point_value(g, grid, k) / kfac);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  return FieldEnvelope(grid, std::move(s), lo, hi);
}

double tau_overlap(const EffectiveEnvelope& a, const EffectiveEnvelope& b, TauAlignment align) {
  if (a.size() < 2 || b.size() < 2) return 0.0;

  // both coordinates ascending, a measured back from its last point
  std::vector<double> xa(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) xa[i] = a.tau[i] - a.tau.back();
  std::vector<double> xb(b.size());
  std::vector<cplx> vb(b.value.begin(), b.value.end());
  if (align == TauAlignment::reversed) {
    for (std::size_t i = 0; i < b.size(); ++i) xb[i] = -(b.tau[i] - b.tau.front());
    std::reverse(xb.begin(), xb.end());
    std::reverse(vb.begin(), vb.end());
  } else {
    for (std::size_t i = 0; i < b.size(); ++i) xb[i] = b.tau[i] - b.tau.back();
  }

  auto at = [](const std::vector<double>& xs, const std::vector<cplx>& vs, double x) -> cplx {
    if (x < xs.front() || x > xs.back()) return 0.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return vs.back();
    const auto j = static_cast<std::size_t>(it - xs.begin());
    if (j == 0) return vs.front();
    const double w = xs[j] - xs[j - 1];
    if (!(w > 0.0)) return vs[j];
    const double f = (x - xs[j - 1]) / w;
    return vs[j - 1] + f * (vs[j] - vs[j - 1]);
  };

  // one quadrature for all three integrals keeps the result <= 1
  std::vector<double> xs = xa;
  xs.insert(xs.end(), xb.begin(), xb.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  cplx ip = 0.0;
  double na = 0.0, nb = 0.0;
  cplx pa = at(xa, a.value, xs.front()), pb = at(xb, vb, xs.front());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const cplx qa = at(xa, a.value, xs[i + 1]), qb = at(xb, vb, xs[i + 1]);
    const double h = 0.5 * (xs[i + 1] - xs[i]);
    ip += h * (std::conj(pa) * pb + std::conj(qa) * qb);
    na += h * (std::norm(pa) + std::norm(qa));
    nb += h * (std::norm(pb) + std::norm(qb));
    pa = qa;
    pb = qb;
  }
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::abs(ip) / std::sqrt(na * nb);
}

Schedule coupling_from_dipole(const DipolePhysical& phys) {
  if (!(phys.omega0 > 0.0)) throw ParameterError(fmt::format("omega0 must be positive (got {})", phys.omega0));
  if (!(phys.volume > 0.0)) throw ParameterError(fmt::format("volume must be positive (got {})", phys.volume));
  if (!(phys.atom_count > 0.0))
    throw ParameterError(fmt::format("atom count must be positive (got {})", phys.atom_count));
  const double factor = std::sqrt(phys.atom_count) *
                        std::sqrt(phys.omega0 / (2.0 * constants::epsilon0 * constants::hbar * phys.volume));
  const Schedule scaled = phys.dipole.scaled(factor);
  return Schedule(scaled.segments(), ScheduleRole::coupling);
}

}  // namespace dipmem

namespace dipmem {

std::vector<double> accumulate_values(const Schedule& s, const TimeGrid& grid) {
  const auto bps = s.breakpoints();
  std::vector<double> acc(grid.size(), 0.0);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const auto pts = split_points(grid.time(k), grid.time(k + 1), bps);
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
      const double lo = pts[j], hi = pts[j + 1];
      sum += 0.5 * (hi - lo) * (s.on_interval(lo, lo, hi) + s.on_interval(hi, lo, hi));
    }
    acc[k + 1] = acc[k] + sum;
  }
  return acc;
}

}  // namespace dipmem
