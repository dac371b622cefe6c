#include "dipmem/time_grid.hpp"

#include "dipmem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace dipmem {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::singular_transform: return "singular_transform";
    case ErrorKind::stability: return "stability";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::unsupported_case: return "unsupported_case";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

TimeGrid::TimeGrid(double t0, double dt, std::size_t n) : t0_(t0), dt_(dt), n_(n) {
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t0))
    throw ParameterError(fmt::format("time grid needs finite t0 and dt > 0 (got t0={}, dt={})", t0, dt));
  if (n < 2) throw ParameterError(fmt::format("time grid needs at least 2 points (got {})", n));
}

std::size_t TimeGrid::nearest(double t) const {
  const double k = std::round((t - t0_) / dt_);
  if (k <= 0.0) return 0;
  if (k >= static_cast<double>(n_ - 1)) return n_ - 1;
  return static_cast<std::size_t>(k);
}

bool TimeGrid::aligned_with(const TimeGrid& other) const {
  if (std::abs(other.dt_ - dt_) > 1e-12 * dt_) return false;
  const double offset = (other.t0_ - t0_) / dt_;
  return std::abs(offset - std::round(offset)) < 1e-6;
}

FieldEnvelope::FieldEnvelope(TimeGrid grid, std::vector<cplx> samples)
    : FieldEnvelope(grid, std::move(samples), 0, grid.size() - 1) {}

FieldEnvelope::FieldEnvelope(TimeGrid grid, std::vector<cplx> samples, std::size_t first,
                             std::size_t last)
    : grid_(grid), samples_(std::move(samples)), first_(first), last_(last) {
  if (samples_.size() != grid_.size())
    throw ParameterError(fmt::format("envelope has {} samples for a grid of {} points",
                                     samples_.size(), grid_.size()));
  if (first_ > last_ || last_ >= samples_.size())
    throw ParameterError(fmt::format("bad support window [{}, {}]", first_, last_));
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const cplx v = samples_[k];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw ParameterError(fmt::format("non-finite envelope sample at t={}", grid_.time(k)));
    if (k < first_ || k > last_) samples_[k] = 0.0;
  }
}

FieldEnvelope FieldEnvelope::zeros(const TimeGrid& grid) {
  return FieldEnvelope(grid, std::vector<cplx>(grid.size(), 0.0));
}

cplx FieldEnvelope::in_cell(std::size_t cell, double frac) const {
  if (cell < first_ || cell >= last_) return 0.0;
  return samples_[cell] + frac * (samples_[cell + 1] - samples_[cell]);
}

double FieldEnvelope::norm() const {
  double s = 0.0;
  for (std::size_t k = first_; k < last_; ++k)
    s += 0.5 * (std::norm(samples_[k]) + std::norm(samples_[k + 1]));
  return s * grid_.dt();
}

FieldEnvelope FieldEnvelope::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw ParameterError("cannot normalize a zero-norm envelope");
  return scaled(1.0 / std::sqrt(n));
}

FieldEnvelope FieldEnvelope::scaled(cplx factor) const {
  std::vector<cplx> s(samples_);
  for (auto& v : s) v *= factor;
  return FieldEnvelope(grid_, std::move(s), first_, last_);
}

FieldEnvelope FieldEnvelope::extended_to(const TimeGrid& target) const {
  if (!target.aligned_with(grid_))
    throw ParameterError("envelope grid is not aligned with the target grid");
  const double offset = std::round((grid_.t0() - target.t0()) / target.dt());
  if (offset < 0.0 || static_cast<std::size_t>(offset) + grid_.size() > target.size())
    throw ParameterError("target grid does not contain the envelope grid");
  const auto shift = static_cast<std::size_t>(offset);
  std::vector<cplx> s(target.size(), 0.0);
  std::copy(samples_.begin(), samples_.end(), s.begin() + static_cast<std::ptrdiff_t>(shift));
  return FieldEnvelope(target, std::move(s), first_ + shift, last_ + shift);
}

bool FieldEnvelope::is_zero() const {
  return std::all_of(samples_.begin(), samples_.end(), [](cplx v) { return v == 0.0; });
}

cplx inner_product(const FieldEnvelope& a, const FieldEnvelope& b) {
  if (!(a.grid() == b.grid())) throw ParameterError("inner product of envelopes on different grids");
  const std::size_t lo = std::max(a.first(), b.first());
  const std::size_t hi = std::min(a.last(), b.last());
  cplx s = 0.0;
  for (std::size_t k = lo; k < hi; ++k)
    s += 0.5 * (std::conj(a[k]) * b[k] + std::conj(a[k + 1]) * b[k + 1]);
  return s * a.grid().dt();
}

double overlap(const FieldEnvelope& a, const FieldEnvelope& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::abs(inner_product(a, b)) / std::sqrt(na * nb);
}

std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n, h);
  if (n > 0) {
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
  }
  if (n == 1) w[0] = 0.0;
  return w;
}

}  // namespace dipmem
