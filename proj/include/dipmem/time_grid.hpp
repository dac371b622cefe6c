#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dipmem {

using cplx = std::complex<double>;

/// Uniform time axis t_k = t0 + k*dt, k in [0, n).
class TimeGrid {
public:
  TimeGrid(double t0, double dt, std::size_t n);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return n_; }
  double time(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }
  double t_end() const { return time(n_ - 1); }

  /// Index of the grid point nearest to t, clamped to the grid.
  std::size_t nearest(double t) const;

  /// True when `other` shares dt and its points fall on this grid's lattice.
  bool aligned_with(const TimeGrid& other) const;

  bool operator==(const TimeGrid&) const = default;

private:
  double t0_;
  double dt_;
  std::size_t n_;
};

/// Complex amplitude samples on a TimeGrid, in units of s^(-1/2) so that the
/// trapezoidal norm is a photon number.
///
/// The envelope is zero outside its support window [first, last] (inclusive
/// sample indices). Between two samples inside the window it is linear; cells
/// outside the window are exactly zero, so an envelope may switch on or off
/// abruptly at a window edge.
class FieldEnvelope {
public:
  FieldEnvelope(TimeGrid grid, std::vector<cplx> samples);
  FieldEnvelope(TimeGrid grid, std::vector<cplx> samples, std::size_t first, std::size_t last);

  static FieldEnvelope zeros(const TimeGrid& grid);

  const TimeGrid& grid() const { return grid_; }
  std::span<const cplx> samples() const { return samples_; }
  cplx operator[](std::size_t k) const { return samples_[k]; }
  std::size_t size() const { return samples_.size(); }
  std::size_t first() const { return first_; }
  std::size_t last() const { return last_; }

  /// Value inside cell [t_k, t_{k+1}] at fractional position frac in [0, 1].
  cplx in_cell(std::size_t cell, double frac) const;

  /// Trapezoidal integral of |E|^2 over the support window.
  double norm() const;

  FieldEnvelope normalized() const;
  FieldEnvelope scaled(cplx factor) const;

  /// Same samples on a longer grid with identical dt; the new grid must contain
  /// this one on its lattice.
  FieldEnvelope extended_to(const TimeGrid& target) const;

  bool is_zero() const;

private:
  TimeGrid grid_;
  std::vector<cplx> samples_;
  std::size_t first_;
  std::size_t last_;
};

/// Trapezoidal inner product <a, b> = int conj(a) b dt over the intersection
/// of both support windows. Grids must be identical.
cplx inner_product(const FieldEnvelope& a, const FieldEnvelope& b);

/// |<a,b>| / (|a| |b|), in [0, 1].
double overlap(const FieldEnvelope& a, const FieldEnvelope& b);

/// Trapezoidal weights for a uniform grid of n points with spacing h.
std::vector<double> trapezoid_weights(std::size_t n, double h);

}  // namespace dipmem
