#pragma once

#include "dipmem/schedule.hpp"
#include "dipmem/time_grid.hpp"

#include <vector>

namespace dipmem {

/// Effective time tau(t) = int_{t0}^{t} g^2/kappa dt' sampled on a grid.
struct EffectiveTime {
  TimeGrid grid;
  std::vector<double> tau;

  double total() const { return tau.back(); }
};

/// Trapezoidal effective time. Cells are split at schedule breakpoints so a
/// square pulse whose edges fall anywhere on the grid integrates exactly.
EffectiveTime effective_time(const Schedule& g, double kappa, const TimeGrid& grid);

/// Generalised accumulation int_{t0}^{t} rate(t') dt' on the same footing,
/// with rate = scale * g^2 (used with scale = 1/c in free space).
std::vector<double> accumulate_squared(const Schedule& g, double scale, const TimeGrid& grid);

enum class FieldRole { input, output, cavity };

/// Field in effective-time variables: explicit (t, tau, value) triples for the
/// grid points where the coupling is on. No resampling onto a uniform tau axis.
struct EffectiveEnvelope {
  std::vector<std::size_t> index;
  std::vector<double> t;
  std::vector<double> tau;
  std::vector<cplx> value;
  FieldRole role = FieldRole::input;

  std::size_t size() const { return value.size(); }
  /// Trapezoid of |value|^2 in tau.
  double norm() const;
};

/// Forward map: E_in, E_out -> (sqrt(kappa)/g) E;  cavity E -> (kappa/g) E.
/// Throws SingularTransformError where g vanishes but the field does not.
EffectiveEnvelope to_effective(const FieldEnvelope& e, const Schedule& g, double kappa,
                               FieldRole role);

/// Inverse map back to a real-time envelope on `grid` (zero off the coupling).
FieldEnvelope from_effective(const EffectiveEnvelope& eff, const Schedule& g, double kappa,
                             const TimeGrid& grid);

enum class TauAlignment {
  /// both measured back from their last point
  same,
  /// b is reversed: its start is matched to a's end
  reversed,
};

/// Normalised overlap of two effective envelopes in tau measure. Both are
/// linearly interpolated onto the union of their tau points.
double tau_overlap(const EffectiveEnvelope& a, const EffectiveEnvelope& b, TauAlignment align);

namespace constants {
inline constexpr double epsilon0 = 8.8541878128e-12;   // F/m
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double speed_of_light = 299792458.0;  // m/s
}  // namespace constants

/// Physical inputs behind the coupling: carrier frequency, quantization volume,
/// controllable dipole moment and atom number.
struct DipolePhysical {
  double omega0 = 0.0;   // rad/s
  double volume = 0.0;   // m^3
  Schedule dipole;       // C m
  double atom_count = 0.0;
};

/// g(t) = sqrt(N) sqrt(omega0 / (2 eps0 hbar V)) * dipole(t)
Schedule coupling_from_dipole(const DipolePhysical& phys);

}  // namespace dipmem

namespace dipmem {

/// int_{t0}^{t_k} s(t') dt' for a (detuning-type) schedule, trapezoidal and
/// split at breakpoints.
std::vector<double> accumulate_values(const Schedule& s, const TimeGrid& grid);

}  // namespace dipmem
