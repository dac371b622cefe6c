#pragma once

#include "dipmem/cavity.hpp"
#include "dipmem/schedule.hpp"
#include "dipmem/time_grid.hpp"

#include <optional>

namespace dipmem {

/// Sample range [first, last] covered by the coupling: from the start of the
/// first cell where it is on to the end of the last such cell.
struct CouplingWindow {
  std::size_t first = 0;
  std::size_t last = 0;
  double t_end = 0.0;
};

/// Throws ParameterError when the coupling never switches on.
CouplingWindow coupling_window(const Schedule& g, const TimeGrid& grid);

/// Normalised write input that is absorbed with the largest possible
/// efficiency: E_in(t) ~ g(t) exp(tau(t) - tau_end). With gamma > 0 only a
/// single square pulse is supported, E_in ~ exp((g^2/kappa + gamma) t).
FieldEnvelope optimal_write_input(const Schedule& g_w, const CavityParams& p, const TimeGrid& grid);

/// Write efficiency from the effective-time kernel
/// sigma_end = i sqrt(2) int exp(tau - tau_end) E_eff(tau) dtau,
/// normalised by the input energy.
double write_efficiency_of(const FieldEnvelope& e_in, const Schedule& g_w, const CavityParams& p);

/// The linear map E_in -> sigma(t_end) discretised on a grid,
/// sigma = sum_k weight_k E_k, built from the adjoint propagator integrated
/// backwards in time. Includes gamma and any detuning.
struct WriteFunctional {
  TimeGrid grid;
  CouplingWindow window;
  std::vector<cplx> weight;        // zero outside the window
  std::vector<double> norm_weight; // trapezoid weights of the window

  cplx apply(const FieldEnvelope& e) const;
  double efficiency(const FieldEnvelope& e) const;
};

WriteFunctional write_functional(const Schedule& g_w, const Schedule& delta, const CavityParams& p,
                                 const TimeGrid& grid);

struct VariationalOptions {
  std::size_t max_iterations = 50;
  double tolerance = 1e-12;
  std::optional<FieldEnvelope> start;
};

/// Maximises |sigma(t_end)|^2 over unit-norm inputs by power iteration on the
/// discretised write functional. Works for any gamma and detuning.
FieldEnvelope variational_optimize(const Schedule& g_w, const Schedule& delta, const CavityParams& p,
                                   const TimeGrid& grid, const VariationalOptions& opt = {});

/// Multiplies E by exp(i int_t^{t_ref} delta dt'), undoing the phase the
/// detuning accumulates before t_ref.
FieldEnvelope compensate_detuning(const FieldEnvelope& e, const Schedule& delta, double t_ref);

struct CouplingPair {
  Schedule write;
  Schedule read;
};

/// Write and read couplings that absorb E_in with efficiency eta_w and
/// re-emit it as E_out(t) ~ E_in(t - T) with read efficiency eta_r.
CouplingPair synthesize_couplings(const FieldEnvelope& e_in, double storage_time, double eta_w,
                                  double eta_r, const CavityParams& p);

/// (1 - exp(-2 tau_w)) (1 - exp(-2 tau_r))
double total_efficiency(double tau_w, double tau_r);

struct CooperativityEstimate {
  double cooperativity = 0.0;
  double efficiency_bound = 0.0;  // C / (C + 1)
};

/// C ~ d F for a medium of optical depth d in a cavity of finesse F.
CooperativityEstimate cooperativity_from_depth(double depth, double finesse);

}  // namespace dipmem
