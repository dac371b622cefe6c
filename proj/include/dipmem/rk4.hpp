#pragma once

#include <array>
#include <complex>
#include <cstddef>

namespace dipmem {

/// One classical Runge-Kutta step for a small complex state vector.
template <std::size_t N, class Rhs>
std::array<std::complex<double>, N> rk4_step(const std::array<std::complex<double>, N>& y, double t,
                                             double h, Rhs&& rhs) {
  using State = std::array<std::complex<double>, N>;
  auto axpy = [](const State& a, double s, const State& b) {
    State r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const State k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const State k4 = rhs(t + h, axpy(y, h, k3));
  State out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace dipmem
