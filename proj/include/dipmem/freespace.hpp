#pragma once

#include "dipmem/effective.hpp"
#include "dipmem/schedule.hpp"
#include "dipmem/time_grid.hpp"

#include <vector>

namespace dipmem {

struct MediumParams {
  double length = 0.0;                        // m
  double gamma = 0.0;                         // rad/s
  double c = constants::speed_of_light;       // m/s

  void validate() const;
  /// Coupling peak that gives the optical depth d = g^2 L / (gamma c).
  double coupling_for_depth(double d) const;
};

/// Atomic polarisation sigma(z) sampled uniformly on [0, L].
struct SpinWave {
  double length = 0.0;
  std::vector<cplx> samples;

  static SpinWave zeros(double length, std::size_t nz);

  std::size_t size() const { return samples.size(); }
  double dz() const { return length / static_cast<double>(samples.size() - 1); }
  double z(std::size_t j) const { return static_cast<double>(j) * dz(); }
  /// n = (1/c) int |sigma|^2 dz, composite Simpson.
  double excitation(double c) const;
  /// sigma(z) -> sigma(L - z)
  SpinWave reversed() const;
  SpinWave scaled(cplx factor) const;
};

/// chi(t) = int (delta - i gamma) dt' and tau(t) = int g^2 / c dt' from t0.
struct FreeSpaceTransform {
  TimeGrid grid;
  std::vector<cplx> chi;
  std::vector<double> tau;

  /// Boundary source b(t) = E(0, tau) dtau/dt = -i g E_in exp(i chi), taken
  /// just right (right = true) or just left of each grid point.
  std::vector<cplx> source_right;
  std::vector<cplx> source_left;
};

FreeSpaceTransform make_transform(const FieldEnvelope& e_boundary, const Schedule& g,
                                  const Schedule& delta, const MediumParams& m);

/// Energy bookkeeping of one free-space evolution (all absolute photon numbers).
struct FreeSpaceLedger {
  double input_energy = 0.0;     // int |E(0,t)|^2 dt
  double output_energy = 0.0;    // int |E(L,t)|^2 dt
  double initial_excitation = 0.0;
  double stored = 0.0;           // excitation at the last grid point
  double decay_loss = 0.0;       // 2 gamma int n dt
  /// |input + initial - output - stored - decay| / (input + initial)
  double balance_residual = 0.0;
};

/// sigma and E on the (t, z) grid; index [k * nz + j] for t_k, z_j. When
/// `full` is false only the last time row is kept.
struct FreeSpaceFields {
  TimeGrid grid;
  double length = 0.0;
  std::size_t nz = 0;
  bool full = true;
  std::vector<double> tau;
  std::vector<cplx> sigma;
  std::vector<cplx> field;
  FieldEnvelope e_in;
  FieldEnvelope e_out;
  std::vector<double> excitation;
  FreeSpaceLedger ledger;

  cplx sigma_at(std::size_t k, std::size_t j) const { return sigma[k * nz + j]; }
  cplx field_at(std::size_t k, std::size_t j) const { return field[k * nz + j]; }
  SpinWave spin_wave(std::size_t k) const;
  SpinWave final_spin_wave() const { return spin_wave(grid.size() - 1); }
};

/// Closed-form solution with the entire Bessel kernels, trapezoidal quadrature
/// on both axes. The time grid comes from e_boundary, the z grid from s0.
/// Throws ResolutionError when the kernel argument changes by more than 0.5
/// across one cell.
FreeSpaceFields analytic_evolution(const FieldEnvelope& e_boundary, const SpinWave& s0,
                                   const Schedule& g, const Schedule& delta, const MediumParams& m);

struct NumericOptions {
  bool store_fields = true;
};

/// Marches dS/dtau = -E, dE/dz = S in tau with a midpoint step; the field is
/// rebuilt by cumulative trapezoidal integration in z. Same resolution guard.
FreeSpaceFields numeric_evolution(const FieldEnvelope& e_boundary, const SpinWave& s0,
                                  const Schedule& g, const Schedule& delta, const MediumParams& m,
                                  const NumericOptions& opt = {});

/// max |a - b| / max |a| over both sigma and E.
double max_relative_difference(const FreeSpaceFields& a, const FreeSpaceFields& b);

/// Write-then-read free-space memory: Gaussian input (amplitude FWTM), Gaussian
/// write coupling displaced by coupling_offset, read coupling the mirror image
/// of the write coupling started storage_time after it.
struct FreeSpaceScenario {
  MediumParams medium{0.01, 5e4};
  double pulse_fwtm = 300e-9;
  double pulse_center = 0.0;
  double coupling_fwtm = 300e-9;
  double coupling_offset = 0.0;
  /// Coupling pulses are truncated at center +- span_factor * coupling_fwtm.
  double span_factor = 1.0;
  double storage_time = 0.0;
  double dt = 1e-9;
  std::size_t nz = 201;
  Schedule delta{{}, ScheduleRole::detuning};
  /// Refine dt and nz per optical depth so the kernel argument changes by at
  /// most 0.2 per time step and 0.1 per z cell. Off: the guards throw instead.
  bool auto_resolution = true;

  void validate() const;
  /// Copy with dt and nz refined for optical depth d (never coarsened).
  FreeSpaceScenario resolved_for(double d) const;
  FieldEnvelope input() const;
  /// Write coupling with unit peak; scale by MediumParams::coupling_for_depth.
  Schedule write_coupling() const;
  Schedule read_coupling() const;
  TimeGrid write_grid() const;
  TimeGrid read_grid() const;
};

struct MemoryRun {
  FreeSpaceFields write;
  FreeSpaceFields read;
  double eta_write = 0.0;  // stored / input
  double eta = 0.0;        // read output / input
};

/// Write then read at optical depth `depth`. `analytic` selects the
/// Bessel-kernel solution instead of the marching integrator.
MemoryRun run_memory(const FreeSpaceScenario& s, double depth, bool backward, bool store_fields = true,
                     bool analytic = false);

struct SweepRow {
  double d = 0.0;
  double eta_forward = 0.0;
  double eta_backward = 0.0;
};

/// One row per optical depth, evaluated on `workers` threads (0: hardware
/// concurrency) and returned in input order.
std::vector<SweepRow> storage_retrieval_sweep(const FreeSpaceScenario& s, const std::vector<double>& d_values,
                                              unsigned workers = 0);

}  // namespace dipmem
