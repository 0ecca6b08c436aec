#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace rtb::quad {

using RealFn = std::function<double(double)>;
using CplxFn = std::function<std::complex<double>(double)>;

// Global adaptive Gauss-Kronrod on [a, b] to relative tolerance tol.
double integrate(const RealFn& f, double a, double b, double tol = 1e-13);
std::complex<double> integrate_complex(const CplxFn& f, double a, double b, double tol = 1e-13);

// Sum of adaptive pieces over consecutive breakpoints (sorted, first/last are the limits).
std::complex<double> integrate_pieces(const CplxFn& f, const std::vector<double>& breaks,
                                      double tol = 1e-13);

}  // namespace rtb::quad
