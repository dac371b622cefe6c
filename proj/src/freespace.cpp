#include "dipmem/freespace.hpp"

#include "dipmem/bessel_kernel.hpp"
#include "dipmem/errors.hpp"
#include "dipmem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace dipmem {

namespace {
constexpr cplx I{0.0, 1.0};

double rms_from_fwtm(double fwtm) { return fwtm / (2.0 * std::sqrt(2.0 * std::log(10.0))); }

void check_resolution(const std::vector<double>& tau, double length, std::size_t nz) {
  double step = 0.0;
  for (std::size_t k = 0; k + 1 < tau.size(); ++k) step = std::max(step, (tau[k + 1] - tau[k]) * length);
  if (step > 0.5)
    throw ResolutionError(fmt::format(
        "time step too coarse: kernel argument changes by {:.3g} per cell (limit 0.5); reduce dt", step));
  const double across = tau.back() * length / static_cast<double>(nz - 1);
  if (across > 0.5)
    throw ResolutionError(fmt::format(
        "z grid too coarse: kernel argument changes by {:.3g} per cell (limit 0.5); increase nz", across));
}

/// Running integral int_0^{z_j} s dz, fourth order: each cell integrates the
/// cubic through four neighbouring samples (one-sided at the ends). Falls back
/// to the trapezoid for fewer than 4 samples.
void cumulative_integral(const std::vector<cplx>& s, double dz, std::vector<cplx>& out) {
  const std::size_t n = s.size();
  out.resize(n);
  out[0] = 0.0;
  if (n < 4) {
    for (std::size_t j = 0; j + 1 < n; ++j) out[j + 1] = out[j] + 0.5 * dz * (s[j] + s[j + 1]);
    return;
  }
  const double h = dz / 24.0;
  out[1] = h * (9.0 * s[0] + 19.0 * s[1] - 5.0 * s[2] + s[3]);
  for (std::size_t j = 1; j + 2 < n; ++j)
    out[j + 1] = out[j] + h * (13.0 * (s[j] + s[j + 1]) - s[j - 1] - s[j + 2]);
  out[n - 1] = out[n - 2] + h * (9.0 * s[n - 1] + 19.0 * s[n - 2] - 5.0 * s[n - 3] + s[n - 4]);
}

void check_inputs(const FieldEnvelope& e, const SpinWave& s0, const MediumParams& m) {
  m.validate();
  if (s0.size() < 3) throw ParameterError("spin wave needs at least 3 z samples");
  if (std::abs(s0.length - m.length) > 1e-12 * m.length)
    throw ParameterError(fmt::format("spin wave length {} m differs from medium length {} m", s0.length, m.length));
  (void)e;
}

/// Composite Simpson weights (in units of dz) for n >= 3 samples, closing
/// with the 3/8 rule when the interval count is odd.
std::vector<double> simpson_weights(std::size_t n) {
  std::vector<double> w(n, 0.0);
  const std::size_t intervals = n - 1;
  const std::size_t simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  for (std::size_t j = 0; j + 2 <= simpson_end; j += 2) {
    w[j] += 1.0 / 3.0;
    w[j + 1] += 4.0 / 3.0;
    w[j + 2] += 1.0 / 3.0;
  }
  if (simpson_end != intervals) {
    const std::size_t j = simpson_end;
    w[j] += 3.0 / 8.0;
    w[j + 1] += 9.0 / 8.0;
    w[j + 2] += 9.0 / 8.0;
    w[j + 3] += 3.0 / 8.0;
  }
  return w;
}

/// Turns S(z, t_k) and D = E(z) - E(0) (rescaled units) into physical fields
/// and the energy ledger, one time step at a time.
class Recorder {
public:
  Recorder(const FieldEnvelope& e, const SpinWave& s0, const Schedule& g, const MediumParams& m,
           const FreeSpaceTransform& tr, bool full)
      : e_(e), g_(g), m_(m), tr_(tr), nz_(s0.size()), dz_(s0.dz()), full_(full), out_(e.grid().size()),
        zw_(simpson_weights(s0.size())) {
    const std::size_t n = e.grid().size();
    f_.grid = e.grid();
    f_.length = m.length;
    f_.nz = nz_;
    f_.tau = tr.tau;
    f_.full = full;
    f_.excitation.assign(n, 0.0);
    const std::size_t rows = full ? n : 1;
    f_.sigma.resize(rows * nz_);
    f_.field.resize(rows * nz_);
  }

  void record(std::size_t k, const std::vector<cplx>& S, const std::vector<cplx>& D) {
    const TimeGrid& grid = e_.grid();
    const cplx back = std::exp(-I * tr_.chi[k]);
    const cplx lift = I * g_(grid.time(k)) / m_.c * back;
    const std::size_t row = full_ ? k : 0;
    double sum = 0.0;
    for (std::size_t j = 0; j < nz_; ++j) {
      const cplx sig = back * S[j];
      f_.sigma[row * nz_ + j] = sig;
      f_.field[row * nz_ + j] = e_[k] + lift * D[j];
      sum += zw_[j] * std::norm(sig);
    }
    f_.excitation[k] = sum * dz_ / m_.c;
    out_[k] = f_.field[row * nz_ + nz_ - 1];

    // output energy with one-sided limits at coupling and window edges
    if (k > 0) {
      const double t0 = grid.time(k - 1), t1 = grid.time(k);
      const cplx ea = e_.in_cell(k - 1, 0.0) +
                      I * g_.on_interval(t0, t0, t1) / m_.c * std::exp(-I * tr_.chi[k - 1]) * prev_tail_;
      const cplx eb = e_.in_cell(k - 1, 1.0) + I * g_.on_interval(t1, t0, t1) / m_.c * back * D[nz_ - 1];
      out_energy_ += 0.5 * grid.dt() * (std::norm(ea) + std::norm(eb));
      decay_ += 0.5 * grid.dt() * (f_.excitation[k - 1] + f_.excitation[k]);
    }
    prev_tail_ = D[nz_ - 1];
  }

  FreeSpaceFields finish() {
    f_.e_in = e_;
    f_.e_out = FieldEnvelope(e_.grid(), std::move(out_));
    FreeSpaceLedger& L = f_.ledger;
    L.input_energy = e_.norm();
    L.output_energy = out_energy_;
    L.initial_excitation = f_.excitation.front();
    L.stored = f_.excitation.back();
    L.decay_loss = 2.0 * m_.gamma * decay_;
    const double total = L.input_energy + L.initial_excitation;
    L.balance_residual =
        total > 0.0 ? std::abs(total - L.output_energy - L.stored - L.decay_loss) / total : 0.0;
    return std::move(f_);
  }

private:
  const FieldEnvelope& e_;
  const Schedule& g_;
  const MediumParams& m_;
  const FreeSpaceTransform& tr_;
  std::size_t nz_;
  double dz_;
  bool full_;
  std::vector<cplx> out_;
  std::vector<double> zw_;
  FreeSpaceFields f_{TimeGrid(0.0, 1.0, 2), 0.0, 0, true, {}, {}, {}, FieldEnvelope::zeros(TimeGrid(0.0, 1.0, 2)),
                     FieldEnvelope::zeros(TimeGrid(0.0, 1.0, 2)), {}, {}};
  cplx prev_tail_ = 0.0;
  double out_energy_ = 0.0;
  double decay_ = 0.0;
};
}  // namespace

void MediumParams::validate() const {
  if (!(length > 0.0) || !std::isfinite(length))
    throw ParameterError(fmt::format("medium length must be positive (got {})", length));
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw ParameterError(fmt::format("gamma must be non-negative (got {})", gamma));
  if (!(c > 0.0)) throw ParameterError(fmt::format("speed of light must be positive (got {})", c));
}

double MediumParams::coupling_for_depth(double d) const {
  validate();
  if (!(d >= 0.0)) throw ParameterError(fmt::format("optical depth must be non-negative (got {})", d));
  if (!(gamma > 0.0)) throw ParameterError("optical depth d = g^2 L / (gamma c) needs gamma > 0");
  return std::sqrt(d * gamma * c / length);
}

SpinWave SpinWave::zeros(double length, std::size_t nz) {
  if (nz < 3) throw ParameterError("spin wave needs at least 3 z samples");
  return SpinWave{length, std::vector<cplx>(nz, 0.0)};
}

double SpinWave::excitation(double c) const {
  const auto w = simpson_weights(samples.size());
  double s = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) s += w[j] * std::norm(samples[j]);
  return s * dz() / c;
}

SpinWave SpinWave::reversed() const {
  return SpinWave{length, std::vector<cplx>(samples.rbegin(), samples.rend())};
}

SpinWave SpinWave::scaled(cplx factor) const {
  SpinWave out = *this;
  for (auto& v : out.samples) v *= factor;
  return out;
}

FreeSpaceTransform make_transform(const FieldEnvelope& e, const Schedule& g, const Schedule& delta,
                                  const MediumParams& m) {
  m.validate();
  const TimeGrid& grid = e.grid();
  const std::size_t n = grid.size();
  FreeSpaceTransform tr{grid, std::vector<cplx>(n), accumulate_squared(g, 1.0 / m.c, grid),
                        std::vector<cplx>(n, 0.0), std::vector<cplx>(n, 0.0)};
  const auto phase = accumulate_values(delta, grid);
  for (std::size_t k = 0; k < n; ++k) tr.chi[k] = cplx(phase[k], -m.gamma * (grid.time(k) - grid.t0()));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double t0 = grid.time(k), t1 = grid.time(k + 1);
    tr.source_right[k] = -I * g.on_interval(t0, t0, t1) * e.in_cell(k, 0.0) * std::exp(I * tr.chi[k]);
    tr.source_left[k + 1] = -I * g.on_interval(t1, t0, t1) * e.in_cell(k, 1.0) * std::exp(I * tr.chi[k + 1]);
  }
  return tr;
}

SpinWave FreeSpaceFields::spin_wave(std::size_t k) const {
  if (!full) {
    if (k + 1 != grid.size()) throw ParameterError("only the final spin wave is kept for this evolution");
    return SpinWave{length, sigma};
  }
  return SpinWave{length, std::vector<cplx>(sigma.begin() + static_cast<std::ptrdiff_t>(k * nz),
                                            sigma.begin() + static_cast<std::ptrdiff_t>((k + 1) * nz))};
}

FreeSpaceFields analytic_evolution(const FieldEnvelope& e, const SpinWave& s0, const Schedule& g,
                                   const Schedule& delta, const MediumParams& m) {
  check_inputs(e, s0, m);
  const FreeSpaceTransform tr = make_transform(e, g, delta, m);
  check_resolution(tr.tau, m.length, s0.size());
  const std::size_t n = e.grid().size(), nz = s0.size();
  const double dt = e.grid().dt(), dz = s0.dz();

  const bool has_source = std::any_of(tr.source_right.begin(), tr.source_right.end(),
                                      [](cplx v) { return v != 0.0; }) ||
                          std::any_of(tr.source_left.begin(), tr.source_left.end(),
                                      [](cplx v) { return v != 0.0; });
  const bool has_spin = std::any_of(s0.samples.begin(), s0.samples.end(), [](cplx v) { return v != 0.0; });

  Recorder rec(e, s0, g, m, tr, true);
  std::vector<cplx> S(nz), D(nz);
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = tr.tau[k];
    for (std::size_t j = 0; j < nz; ++j) {
      const double z = s0.z(j);
      cplx s = s0.samples[j], d = 0.0;
      if (has_source) {
        // int_0^tau E(0,tau') K(-(tau - tau') z) dtau', as a time integral of the source
        cplx src0 = 0.0, src1 = 0.0;
        KernelPair prev = entire_bessel_kernels(-(tk - tr.tau[0]) * z);
        for (std::size_t i = 0; i < k; ++i) {
          const KernelPair next = entire_bessel_kernels(-(tk - tr.tau[i + 1]) * z);
          src0 += 0.5 * dt * (tr.source_right[i] * prev.k0 + tr.source_left[i + 1] * next.k0);
          src1 += 0.5 * dt * (tr.source_right[i] * prev.k1 + tr.source_left[i + 1] * next.k1);
          prev = next;
        }
        s -= src0;
        d -= z * src1;
      }
      if (has_spin && j > 0) {
        cplx sp0 = 0.0, sp1 = 0.0;
        for (std::size_t q = 0; q <= j; ++q) {
          const double w = (q == 0 || q == j) ? 0.5 * dz : dz;
          const KernelPair kp = entire_bessel_kernels(-tk * (z - s0.z(q)));
          sp0 += w * s0.samples[q] * kp.k0;
          sp1 += w * s0.samples[q] * kp.k1;
        }
        d += sp0;
        s -= tk * sp1;
      }
      S[j] = s;
      D[j] = d;
    }
    rec.record(k, S, D);
  }
  return rec.finish();
}

FreeSpaceFields numeric_evolution(const FieldEnvelope& e, const SpinWave& s0, const Schedule& g,
                                  const Schedule& delta, const MediumParams& m, const NumericOptions& opt) {
  check_inputs(e, s0, m);
  const FreeSpaceTransform tr = make_transform(e, g, delta, m);
  check_resolution(tr.tau, m.length, s0.size());
  const std::size_t n = e.grid().size(), nz = s0.size();
  const double dt = e.grid().dt(), dz = s0.dz();

  Recorder rec(e, s0, g, m, tr, opt.store_fields);
  std::vector<cplx> cur = s0.samples, half(nz), cum;
  for (std::size_t k = 0;; ++k) {
    cumulative_integral(cur, dz, cum);
    rec.record(k, cur, cum);
    if (k + 1 == n) break;
    const double dtau = tr.tau[k + 1] - tr.tau[k];
    const cplx B = 0.5 * dt * (tr.source_right[k] + tr.source_left[k + 1]);
    for (std::size_t j = 0; j < nz; ++j) half[j] = cur[j] - 0.5 * (B + dtau * cum[j]);
    cumulative_integral(half, dz, cum);
    for (std::size_t j = 0; j < nz; ++j) cur[j] -= B + dtau * cum[j];
  }
  return rec.finish();
}

double max_relative_difference(const FreeSpaceFields& a, const FreeSpaceFields& b) {
  if (!a.full || !b.full) throw ParameterError("field comparison needs fully stored evolutions");
  if (!(a.grid == b.grid) || a.nz != b.nz) throw ParameterError("field grids differ");
  auto rel = [](const std::vector<cplx>& x, const std::vector<cplx>& y) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      scale = std::max(scale, std::abs(x[i]));
      diff = std::max(diff, std::abs(x[i] - y[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
  };
  return std::max(rel(a.sigma, b.sigma), rel(a.field, b.field));
}

void FreeSpaceScenario::validate() const {
  medium.validate();
  if (!(pulse_fwtm > 0.0)) throw ParameterError(fmt::format("pulse_fwtm must be positive (got {})", pulse_fwtm));
  if (!(coupling_fwtm > 0.0))
    throw ParameterError(fmt::format("coupling_fwtm must be positive (got {})", coupling_fwtm));
  if (!(span_factor > 0.0)) throw ParameterError(fmt::format("span_factor must be positive (got {})", span_factor));
  if (!(storage_time >= 0.0))
    throw ParameterError(fmt::format("storage_time must be non-negative (got {})", storage_time));
  if (!(dt > 0.0)) throw ParameterError(fmt::format("dt must be positive (got {})", dt));
  if (nz < 3) throw ParameterError(fmt::format("nz must be at least 3 (got {})", nz));
  if (dt > pulse_fwtm / 20.0)
    throw ResolutionError(fmt::format("dt = {} s does not resolve the pulse (FWTM {} s); need dt <= FWTM/20", dt,
                                      pulse_fwtm));
}

FreeSpaceScenario FreeSpaceScenario::resolved_for(double d) const {
  FreeSpaceScenario r = *this;
  const double rate = d * medium.gamma;  // peak of g^2 L / c
  if (!(rate > 0.0)) return r;
  r.dt = std::min(dt, 0.2 / rate);
  const auto acc = accumulate_squared(write_coupling(), 1.0, r.write_grid());
  const double tau_l = rate * acc.back();
  r.nz = std::max(nz, static_cast<std::size_t>(std::ceil(tau_l / 0.1)) + 1);
  return r;
}

Schedule FreeSpaceScenario::write_coupling() const {
  return Schedule::gaussian(pulse_center + coupling_offset, rms_from_fwtm(coupling_fwtm), 1.0,
                            span_factor * coupling_fwtm);
}

TimeGrid FreeSpaceScenario::write_grid() const {
  validate();
  const double gc = pulse_center + coupling_offset, gs = span_factor * coupling_fwtm;
  const double t0 = std::min(pulse_center - 1.1 * pulse_fwtm, gc - gs);
  const double t1 = std::max(pulse_center + 1.1 * pulse_fwtm, gc + gs);
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9)) + 1;
  return TimeGrid(t0, dt, n);
}

TimeGrid FreeSpaceScenario::read_grid() const {
  const TimeGrid w = write_grid();
  const double span = 2.0 * span_factor * coupling_fwtm + storage_time;
  const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9)) + 1;
  return TimeGrid(w.t_end(), dt, n);
}

Schedule FreeSpaceScenario::read_coupling() const {
  const double gc = pulse_center + coupling_offset, gs = span_factor * coupling_fwtm;
  // support [a, b] maps to [t_w + T, t_w + T + (b - a)]
  return write_coupling().mirrored(write_grid().t_end() + storage_time + gc + gs);
}

FieldEnvelope FreeSpaceScenario::input() const {
  const TimeGrid grid = write_grid();
  const double w = rms_from_fwtm(pulse_fwtm);
  std::vector<cplx> s(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = (grid.time(k) - pulse_center) / w;
    s[k] = std::exp(-0.5 * x * x);
  }
  return FieldEnvelope(grid, std::move(s)).normalized();
}

namespace {
FreeSpaceFields write_pass(const FreeSpaceScenario& s, double peak, bool full, bool analytic = false) {
  if (analytic)
    return analytic_evolution(s.input(), SpinWave::zeros(s.medium.length, s.nz), s.write_coupling().scaled(peak),
                              s.delta, s.medium);
  return numeric_evolution(s.input(), SpinWave::zeros(s.medium.length, s.nz), s.write_coupling().scaled(peak),
                           s.delta, s.medium, {.store_fields = full});
}

FreeSpaceFields read_pass(const FreeSpaceScenario& s, double peak, const FreeSpaceFields& write, bool backward,
                          bool full, bool analytic = false) {
  SpinWave stored = write.final_spin_wave();
  if (backward) stored = stored.reversed();
  if (analytic)
    return analytic_evolution(FieldEnvelope::zeros(s.read_grid()), stored, s.read_coupling().scaled(peak), s.delta,
                              s.medium);
  return numeric_evolution(FieldEnvelope::zeros(s.read_grid()), stored, s.read_coupling().scaled(peak), s.delta,
                           s.medium, {.store_fields = full});
}
}  // namespace

MemoryRun run_memory(const FreeSpaceScenario& base, double depth, bool backward, bool store_fields, bool analytic) {
  base.validate();
  const FreeSpaceScenario s = base.auto_resolution ? base.resolved_for(depth) : base;
  const double peak = s.medium.coupling_for_depth(depth);
  FreeSpaceFields write = write_pass(s, peak, store_fields || analytic, analytic);
  FreeSpaceFields read = read_pass(s, peak, write, backward, store_fields || analytic, analytic);
  const double in = write.ledger.input_energy;
  const double eta_w = write.ledger.stored / in, eta = read.ledger.output_energy / in;
  return MemoryRun{std::move(write), std::move(read), eta_w, eta};
}

std::vector<SweepRow> storage_retrieval_sweep(const FreeSpaceScenario& s, const std::vector<double>& d_values,
                                              unsigned workers) {
  if (d_values.empty()) throw ParameterError("optical depth list is empty");
  s.validate();
  for (double d : d_values)
    if (!(d >= 0.0)) throw ParameterError(fmt::format("optical depth must be non-negative (got {})", d));
  return parallel_map<SweepRow>(d_values.size(), workers, [&](std::size_t i) {
    const double d = d_values[i];
    const FreeSpaceScenario r = s.auto_resolution ? s.resolved_for(d) : s;
    const double peak = s.medium.coupling_for_depth(d);
    const FreeSpaceFields write = write_pass(r, peak, false);
    const double in = write.ledger.input_energy;
    return SweepRow{d, read_pass(r, peak, write, false, false).ledger.output_energy / in,
                    read_pass(r, peak, write, true, false).ledger.output_energy / in};
  });
}

}  // namespace dipmem
