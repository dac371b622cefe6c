#include "dipmem/schedule.hpp"

#include "dipmem/errors.hpp"

#include <algorithm>
#include <cmath>

// pchip.hpp calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <fmt/format.h>

namespace dipmem {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_knots(const std::vector<double>& times, const std::vector<double>& values,
                 const char* what) {
  if (times.size() != values.size())
    throw ParameterError(fmt::format("{}: {} times but {} values", what, times.size(), values.size()));
  if (times.size() < 2) throw ParameterError(fmt::format("{}: needs at least 2 knots", what));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
      throw ParameterError(fmt::format("{}: non-finite knot {}", what, i));
    if (i > 0 && !(times[i] > times[i - 1]))
      throw ParameterError(fmt::format("{}: knot times must be strictly increasing (index {})", what, i));
  }
}

double linear_at(const std::vector<double>& ts, const std::vector<double>& vs, double t) {
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  if (it == ts.begin()) return vs.front();
  if (it == ts.end()) return vs.back();
  const auto i = static_cast<std::size_t>(it - ts.begin()) - 1;
  const double f = (t - ts[i]) / (ts[i + 1] - ts[i]);
  return vs[i] + f * (vs[i + 1] - vs[i]);
}

}  // namespace

struct Schedule::Interpolant {
  boost::math::interpolators::pchip<std::vector<double>> spline;
};

double segment_start(const Segment& s) {
  return std::visit(overloaded{[](const SquarePulse& p) { return p.start; },
                               [](const GaussianPulse& p) { return p.start; },
                               [](const PiecewiseLinear& p) { return p.times.front(); },
                               [](const Tabulated& p) { return p.times.front(); }},
                    s);
}

double segment_end(const Segment& s) {
  return std::visit(overloaded{[](const SquarePulse& p) { return p.end; },
                               [](const GaussianPulse& p) { return p.end; },
                               [](const PiecewiseLinear& p) { return p.times.back(); },
                               [](const Tabulated& p) { return p.times.back(); }},
                    s);
}

Schedule::Schedule(std::vector<Segment> segments, ScheduleRole role)
    : segments_(std::move(segments)), role_(role) {
  const bool coupling = role_ == ScheduleRole::coupling;
  for (const auto& seg : segments_) {
    std::visit(
        overloaded{
            [&](const SquarePulse& p) {
              if (!std::isfinite(p.start) || !std::isfinite(p.end) || !(p.end > p.start))
                throw ParameterError(fmt::format("square pulse needs start < end (got [{}, {}])", p.start, p.end));
              if (!std::isfinite(p.amplitude) || (coupling && p.amplitude < 0.0))
                throw ParameterError(fmt::format("invalid square amplitude {}", p.amplitude));
            },
            [&](const GaussianPulse& p) {
              if (!std::isfinite(p.start) || !std::isfinite(p.end) || !(p.end > p.start))
                throw ParameterError(fmt::format("gaussian needs start < end (got [{}, {}])", p.start, p.end));
              if (!(p.width > 0.0) || !std::isfinite(p.center))
                throw ParameterError(fmt::format("gaussian needs width > 0 (got {})", p.width));
              if (!std::isfinite(p.amplitude) || (coupling && p.amplitude < 0.0))
                throw ParameterError(fmt::format("invalid gaussian amplitude {}", p.amplitude));
            },
            [&](const PiecewiseLinear& p) {
              check_knots(p.times, p.values, "piecewise-linear");
              if (coupling)
                for (double v : p.values)
                  if (v < 0.0) throw ParameterError("coupling piecewise-linear values must be non-negative");
            },
            [&](const Tabulated& p) {
              check_knots(p.times, p.values, "tabulated");
              if (coupling)
                for (double v : p.values)
                  if (v < 0.0) throw ParameterError("coupling tabulated values must be non-negative");
            }},
        seg);
  }
  std::stable_sort(segments_.begin(), segments_.end(),
                   [](const Segment& a, const Segment& b) { return segment_start(a) < segment_start(b); });
  for (std::size_t i = 1; i < segments_.size(); ++i)
    if (segment_start(segments_[i]) < segment_end(segments_[i - 1]))
      throw ParameterError(fmt::format("schedule segments overlap near t={}", segment_start(segments_[i])));

  interpolants_.resize(segments_.size());
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (const auto* tab = std::get_if<Tabulated>(&segments_[i]); tab && tab->times.size() >= 4) {
      auto xs = tab->times;
      auto ys = tab->values;
      interpolants_[i] = std::make_shared<const Interpolant>(
          Interpolant{boost::math::interpolators::pchip<std::vector<double>>(std::move(xs), std::move(ys))});
    }
  }

  for (const auto& seg : segments_) {
    const double p = std::visit(
        overloaded{[](const SquarePulse& s) { return std::abs(s.amplitude); },
                   [](const GaussianPulse& s) {
                     const double c = std::clamp(s.center, s.start, s.end);
                     const double x = (c - s.center) / s.width;
                     return std::abs(s.amplitude) * std::exp(-0.5 * x * x);
                   },
                   [](const PiecewiseLinear& s) {
                     double m = 0.0;
                     for (double v : s.values) m = std::max(m, std::abs(v));
                     return m;
                   },
                   [](const Tabulated& s) {
                     double m = 0.0;
                     for (double v : s.values) m = std::max(m, std::abs(v));
                     return m;
                   }},
        seg);
    peak_ = std::max(peak_, p);
  }
}

Schedule Schedule::square(double start, double end, double amplitude) {
  return Schedule({SquarePulse{start, end, amplitude}});
}

Schedule Schedule::gaussian(double center, double width, double amplitude, double half_span) {
  return Schedule({GaussianPulse{center - half_span, center + half_span, center, width, amplitude}});
}

Schedule Schedule::tabulated(std::vector<double> times, std::vector<double> values, ScheduleRole role) {
  return Schedule({Tabulated{std::move(times), std::move(values)}}, role);
}

double Schedule::eval_segment(std::size_t i, double t) const {
  const Segment& seg = segments_[i];
  t = std::clamp(t, segment_start(seg), segment_end(seg));
  const double v = std::visit(
      overloaded{[](const SquarePulse& s) { return s.amplitude; },
                 [t](const GaussianPulse& s) {
                   const double x = (t - s.center) / s.width;
                   return s.amplitude * std::exp(-0.5 * x * x);
                 },
                 [t](const PiecewiseLinear& s) { return linear_at(s.times, s.values, t); },
                 [&, t](const Tabulated& s) {
                   if (interpolants_[i]) return interpolants_[i]->spline(t);
                   return linear_at(s.times, s.values, t);
                 }},
      seg);
  return role_ == ScheduleRole::coupling ? std::max(v, 0.0) : v;
}

double Schedule::operator()(double t) const {
  // first segment whose end is >= t
  auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                             [](const Segment& s, double x) { return segment_end(s) < x; });
  if (it == segments_.end() || segment_start(*it) > t) return 0.0;
  return eval_segment(static_cast<std::size_t>(it - segments_.begin()), t);
}

double Schedule::on_interval(double t, double lo, double hi) const {
  const double mid = 0.5 * (lo + hi);
  auto it = std::lower_bound(segments_.begin(), segments_.end(), mid,
                             [](const Segment& s, double x) { return segment_end(s) < x; });
  if (it == segments_.end() || segment_start(*it) > mid) return 0.0;
  return eval_segment(static_cast<std::size_t>(it - segments_.begin()), t);
}

std::vector<double> Schedule::breakpoints() const {
  std::vector<double> out;
  out.reserve(2 * segments_.size());
  for (const auto& s : segments_) {
    out.push_back(segment_start(s));
    out.push_back(segment_end(s));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Schedule::peak() const { return peak_; }

double Schedule::zero_threshold() const { return 1e-12 * peak_; }

Schedule Schedule::scaled(double factor) const {
  if (role_ == ScheduleRole::coupling && factor < 0.0)
    throw ParameterError("coupling schedules cannot be scaled by a negative factor");
  std::vector<Segment> segs = segments_;
  for (auto& seg : segs) {
    std::visit(overloaded{[&](SquarePulse& s) { s.amplitude *= factor; },
                          [&](GaussianPulse& s) { s.amplitude *= factor; },
                          [&](PiecewiseLinear& s) {
                            for (auto& v : s.values) v *= factor;
                          },
                          [&](Tabulated& s) {
                            for (auto& v : s.values) v *= factor;
                          }},
               seg);
  }
  return Schedule(std::move(segs), role_);
}

Schedule Schedule::shifted(double offset) const {
  std::vector<Segment> segs = segments_;
  for (auto& seg : segs) {
    std::visit(overloaded{[&](SquarePulse& s) {
                            s.start += offset;
                            s.end += offset;
                          },
                          [&](GaussianPulse& s) {
                            s.start += offset;
                            s.end += offset;
                            s.center += offset;
                          },
                          [&](PiecewiseLinear& s) {
                            for (auto& t : s.times) t += offset;
                          },
                          [&](Tabulated& s) {
                            for (auto& t : s.times) t += offset;
                          }},
               seg);
  }
  return Schedule(std::move(segs), role_);
}

Schedule Schedule::mirrored(double pivot) const {
  auto flip = [pivot](std::vector<double>& ts, std::vector<double>& vs) {
    for (auto& t : ts) t = pivot - t;
    std::reverse(ts.begin(), ts.end());
    std::reverse(vs.begin(), vs.end());
  };
  std::vector<Segment> segs = segments_;
  for (auto& seg : segs) {
    std::visit(overloaded{[&](SquarePulse& s) {
                            const double a = pivot - s.end, b = pivot - s.start;
                            s.start = a;
                            s.end = b;
                          },
                          [&](GaussianPulse& s) {
                            const double a = pivot - s.end, b = pivot - s.start;
                            s.start = a;
                            s.end = b;
                            s.center = pivot - s.center;
                          },
                          [&](PiecewiseLinear& s) { flip(s.times, s.values); },
                          [&](Tabulated& s) { flip(s.times, s.values); }},
               seg);
  }
  return Schedule(std::move(segs), role_);
}

Schedule Schedule::concat(const Schedule& a, const Schedule& b) {
  if (!a.empty() && !b.empty() && a.role_ != b.role_)
    throw ParameterError("cannot concatenate coupling and detuning schedules");
  std::vector<Segment> segs = a.segments_;
  segs.insert(segs.end(), b.segments_.begin(), b.segments_.end());
  return Schedule(std::move(segs), a.empty() ? b.role_ : a.role_);
}

std::vector<double> split_points(double a, double b, const std::vector<double>& breakpoints) {
  std::vector<double> pts{a};
  const double eps = 1e-9 * (b - a);
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), a + eps);
  for (; it != breakpoints.end() && *it < b - eps; ++it) pts.push_back(*it);
  pts.push_back(b);
  return pts;
}

std::vector<double> merge_breakpoints(std::initializer_list<const std::vector<double>*> lists) {
  std::vector<double> out;
  for (const auto* l : lists) out.insert(out.end(), l->begin(), l->end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace dipmem
