#pragma once

// Independent reference computations for the tests. Nothing here calls the library's
// numerics; only closed forms, textbook methods and brute force.

#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// V = z^2/2 - z^n/n and its derivative, written out directly.
cplx V(int n, cplx z);
cplx dV(int n, cplx z);

// All roots of a polynomial (coefficients low to high) by Durand-Kerner iteration.
std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs);
// The root of 2 eps - 2V nearest +sqrt(2 eps).
cplx inner_root(int n, cplx eps);

// Gamma-function form of the even-n cycle-integral coefficient.
double cycle_coefficient(int n);

// Composite Simpson with m panels.
cplx simpson(const std::function<cplx(double)>& f, double a, double b, int m);

// One loop of the velocity function on a circle of radius R around the origin, with
// nearest-sign continuation from i z: counter-clockwise for Im eps >= 0.
cplx loop_integral(int n, cplx eps, double R, bool time, int nodes = 1 << 14);

// Real-line integral of sqrt(2 eps - 2V) (or its inverse) with the principal branch,
// by Simpson on a log-graded grid that resolves the sqrt(2|eps|) scale.
cplx line_integral(int n, double x, double y, cplx eps, bool time);

// Fixed-step classical RK4 for z'' = -V'(z); returns z and v at t.
struct State {
  cplx z, v;
};
State rk4(int n, cplx z0, cplx v0, double t, double h);
// Harmonic-potential variant for checks without nonlinearity.
State rk4_harmonic(cplx z0, cplx v0, double t, double h);

// Period of real oscillation in the quartic well for small real eps, from the factorised
// quartic 2 eps - 2V = (r0^2 - r^2)(r1^2 - r^2)/2 and r = r0 sin(theta).
double quartic_period(double eps);

// Secant solve of N * loop_time(eps) + line_time(eps) = t on the complex plane.
cplx saddle_epsilon(int n, double x, double y, double t, int N, cplx seed);

// Least-squares slope of ys against xs.
double slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Crank-Nicolson reference in plain arrays: evolves psi under H = -h^2/2 d2 + U.
std::vector<cplx> cn_evolve(std::vector<cplx> psi, const std::vector<cplx>& U, double h,
                            double dx, double dt, int steps);

}  // namespace oracle
