#pragma once

#include "dipmem/schedule.hpp"
#include "dipmem/time_grid.hpp"

#include <optional>
#include <vector>

namespace dipmem {

/// Cavity field decay rate kappa and atomic decay rate gamma, both in rad/s.
struct CavityParams {
  double kappa = 0.0;
  double gamma = 0.0;

  void validate() const;
  /// C = g^2 / (kappa gamma) for a given coupling strength.
  double cooperativity(double g) const;
};

struct CavityState {
  cplx sigma = 0.0;
  cplx e_cav = 0.0;
};

/// Efficiencies and energy bookkeeping of one write/store/read run.
///
/// The write phase ends where the coupling first switches off after having
/// been on; the read phase starts at the next switch-on and runs to the end of
/// the grid. Fractions are relative to the input energy.
struct EfficiencyLedger {
  std::optional<double> eta_w;
  std::optional<double> eta_r;
  std::optional<double> eta_tot;
  double input_energy = 0.0;       // energy carried in by the interpolated input
  double output_energy = 0.0;
  double leakage = 0.0;             // output during write / input
  double decay_loss_write = 0.0;    // 2 gamma int |sigma|^2 during write / input
  double decay_loss_total = 0.0;    // over the whole run, absolute
  double emitted_read = 0.0;        // absolute output energy during read
  double residual_cavity = 0.0;     // |E_cav|^2 at write end / input (full model)
  std::size_t write_end = 0;
  std::optional<std::size_t> read_start;
};

struct SimResult {
  TimeGrid grid;
  std::vector<cplx> sigma;
  /// Cavity field. Integrated in the full model, reconstructed from the
  /// adiabatic relation otherwise.
  std::vector<cplx> e_cav;
  FieldEnvelope e_in;
  FieldEnvelope e_out;
  /// Excitation held by the system at each grid point (|sigma|^2, plus
  /// |E_cav|^2 in the full model).
  std::vector<double> excitation;
  /// Per cell: input energy - output energy - decay loss.
  std::vector<double> cell_flux;
  /// max(|E_in|^2, |E_out|^2) over the grid.
  double flux_scale = 0.0;
  EfficiencyLedger ledger;
  double continuity_residual = 0.0;
  bool full_model = false;
};

struct SimOptions {
  CavityState initial{};
  /// Simulation grid. Defaults to the input envelope's grid; when given, the
  /// envelope is zero-extended onto it (grids must be aligned).
  std::optional<TimeGrid> grid;
};

/// Full cavity model with the cavity field as a dynamical variable.
/// Requires dt <= 0.1/kappa; cells are integrated in RK4 substeps of at most
/// 0.025 / (fastest rate).
SimResult simulate_full(const FieldEnvelope& e_in, const Schedule& g, const Schedule& delta,
                        const CavityParams& p, const SimOptions& opt = {});

/// Cavity field adiabatically eliminated. Same substepping, with the rate
/// g^2/kappa + gamma + |delta|.
SimResult simulate_adiabatic(const FieldEnvelope& e_in, const Schedule& g, const Schedule& delta,
                             const CavityParams& p, const SimOptions& opt = {});

/// Closed-form read: sigma(t) = sigma0 exp(-tau(t) - gamma (t - t0)).
SimResult read_analytic(cplx sigma0, const Schedule& g, const CavityParams& p, const TimeGrid& grid);

/// Efficiency of a square coupling pulse of strength g0 and given duration
/// (write with matched input, or read).
double square_pulse_efficiency(double g0, double duration, const CavityParams& p);

/// max_t |d(excitation)/dt - |E_in|^2 + |E_out|^2 + decay| / max flux, with
/// the derivative taken cell by cell.
double continuity_residual(const SimResult& result);

}  // namespace dipmem
