#pragma once

namespace dipmem {

struct KernelPair {
  double k0 = 1.0;
  double k1 = 1.0;
};

/// Entire kernels K0(a) = sum a^k / (k!)^2 and K1(a) = sum a^k / (k! (k+1)!).
/// For a >= 0: K0 = I0(2 sqrt a), K1 = I1(2 sqrt a) / sqrt a.
/// For a < 0:  K0 = J0(2 sqrt -a), K1 = J1(2 sqrt -a) / sqrt -a.
/// K0' = K1 and K1 + a K1' = K0.
KernelPair entire_bessel_kernels(double a);

/// order 0 or 1; throws ParameterError otherwise.
double entire_bessel_kernel(int order, double a);

}  // namespace dipmem
