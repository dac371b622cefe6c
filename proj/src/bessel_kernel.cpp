#include "dipmem/bessel_kernel.hpp"

#include "dipmem/errors.hpp"

#include <cmath>
#include <fmt/format.h>

namespace dipmem {

namespace {
// Beyond this |a| the alternating series loses more than a few digits.
constexpr double series_limit = 25.0;
}

KernelPair entire_bessel_kernels(double a) {
  if (std::abs(a) <= series_limit) {
    double t0 = 1.0, t1 = 1.0;
    double s0 = 1.0, s1 = 1.0;
    double big = 1.0;
    for (int k = 0; k < 200; ++k) {
      const double kp1 = k + 1.0;
      t0 *= a / (kp1 * kp1);
      t1 *= a / (kp1 * (kp1 + 1.0));
      s0 += t0;
      s1 += t1;
      big = std::max(big, std::abs(t0));
      if (kp1 * kp1 > std::abs(a) && std::abs(t0) <= 1e-18 * big && std::abs(t1) <= 1e-18 * big) break;
    }
    return {s0, s1};
  }
  const double x = 2.0 * std::sqrt(std::abs(a));
  const double r = std::sqrt(std::abs(a));
  if (a > 0.0) return {std::cyl_bessel_i(0.0, x), std::cyl_bessel_i(1.0, x) / r};
  return {std::cyl_bessel_j(0.0, x), std::cyl_bessel_j(1.0, x) / r};
}

double entire_bessel_kernel(int order, double a) {
  if (order != 0 && order != 1)
    throw ParameterError(fmt::format("kernel order must be 0 or 1 (got {})", order));
  const KernelPair k = entire_bessel_kernels(a);
  return order == 0 ? k.k0 : k.k1;
}

}  // namespace dipmem
