#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace dipmem {

// Schedule primitives. Each one is nonzero only on its closed support
// [start, end]; times are in seconds, amplitudes in rad/s.

struct SquarePulse {
  double start = 0.0;
  double end = 0.0;
  double amplitude = 0.0;
};

/// amplitude * exp(-(t - center)^2 / (2 width^2)), truncated to [start, end].
struct GaussianPulse {
  double start = 0.0;
  double end = 0.0;
  double center = 0.0;
  double width = 0.0;
  double amplitude = 0.0;
};

/// Linear interpolation between knots; support is [times.front(), times.back()].
struct PiecewiseLinear {
  std::vector<double> times;
  std::vector<double> values;
};

/// Monotone piecewise-cubic (PCHIP) interpolation between knots.
struct Tabulated {
  std::vector<double> times;
  std::vector<double> values;
};

using Segment = std::variant<SquarePulse, GaussianPulse, PiecewiseLinear, Tabulated>;

double segment_start(const Segment& s);
double segment_end(const Segment& s);

enum class ScheduleRole { coupling, detuning };

/// A real function of time assembled from non-overlapping, sorted primitives.
/// Coupling schedules are non-negative everywhere; evaluation outside every
/// support is exactly zero. Immutable once built.
class Schedule {
public:
  Schedule() = default;
  explicit Schedule(std::vector<Segment> segments, ScheduleRole role = ScheduleRole::coupling);

  static Schedule square(double start, double end, double amplitude);
  static Schedule gaussian(double center, double width, double amplitude, double half_span);
  static Schedule tabulated(std::vector<double> times, std::vector<double> values,
                            ScheduleRole role = ScheduleRole::coupling);

  /// Pointwise value; at a shared segment edge the earlier segment wins.
  double operator()(double t) const;

  /// Value at t of whichever piece is active on the open interval (lo, hi).
  /// Callers guarantee no breakpoint lies strictly inside (lo, hi); this picks
  /// the one-sided limit at a discontinuity.
  double on_interval(double t, double lo, double hi) const;

  /// Sorted segment edges (where the schedule may jump).
  std::vector<double> breakpoints() const;

  /// Largest |value| over all supports.
  double peak() const;

  Schedule scaled(double factor) const;
  Schedule shifted(double offset) const;
  /// t -> value(pivot - t)
  Schedule mirrored(double pivot) const;

  /// Union of two schedules with disjoint supports.
  static Schedule concat(const Schedule& a, const Schedule& b);

  bool empty() const { return segments_.empty(); }
  ScheduleRole role() const { return role_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Values below this are treated as exactly zero (1e-12 of the peak).
  double zero_threshold() const;

private:
  struct Interpolant;
  double eval_segment(std::size_t i, double t) const;

  std::vector<Segment> segments_;
  std::vector<std::shared_ptr<const Interpolant>> interpolants_;
  ScheduleRole role_ = ScheduleRole::coupling;
  double peak_ = 0.0;
};

/// Half-open breakpoint-free pieces of [a, b]: the cell itself, split at every
/// schedule breakpoint strictly inside it.
std::vector<double> split_points(double a, double b, const std::vector<double>& breakpoints);

/// Merge several sorted breakpoint lists.
std::vector<double> merge_breakpoints(std::initializer_list<const std::vector<double>*> lists);

}  // namespace dipmem
