#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double kPi = std::numbers::pi;

cplx ipow(cplx z, int n) {
  cplx r = 1;
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

cplx closer(cplx w, cplx ref) { return std::abs(w - ref) <= std::abs(w + ref) ? w : -w; }

}  // namespace

cplx V(int n, cplx z) { return z * z / 2.0 - ipow(z, n) / double(n); }
cplx dV(int n, cplx z) { return z - ipow(z, n - 1); }

std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs) {
  int deg = int(coeffs.size()) - 1;
  std::vector<cplx> a(coeffs.size());
  for (int i = 0; i <= deg; ++i) a[i] = coeffs[i] / coeffs[deg];
  auto eval = [&](cplx z) {
    cplx r = 0;
    for (int i = deg; i >= 0; --i) r = r * z + a[i];
    return r;
  };
  std::vector<cplx> z(deg);
  for (int k = 0; k < deg; ++k) z[k] = std::pow(cplx(0.4, 0.9), k);
  for (int it = 0; it < 2000; ++it) {
    double move = 0;
    for (int k = 0; k < deg; ++k) {
      cplx den = 1;
      for (int j = 0; j < deg; ++j)
        if (j != k) den *= z[k] - z[j];
      cplx d = eval(z[k]) / den;
      z[k] -= d;
      move = std::max(move, std::abs(d));
    }
    if (move < 1e-17) break;
  }
  return z;
}

cplx inner_root(int n, cplx eps) {
  std::vector<cplx> c(n + 1, 0.0);
  c[0] = 2.0 * eps;
  c[2] = -1.0;
  c[n] = 2.0 / n;
  auto r = poly_roots(c);
  cplx target = std::sqrt(2.0 * eps);
  return *std::min_element(r.begin(), r.end(),
                           [&](cplx a, cplx b) { return std::abs(a - target) < std::abs(b - target); });
}

double cycle_coefficient(int n) {
  // First-order expansion in z^n: the loop of s^n / sqrt(1 - s^2) is twice a beta integral.
  return std::pow(2.0, n / 2.0) * std::beta(0.5, (n + 1) / 2.0) / (n * kPi);
}

cplx simpson(const std::function<cplx(double)>& f, double a, double b, int m) {
  if (m % 2) ++m;
  double h = (b - a) / m;
  cplx s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3);
}

cplx loop_integral(int n, cplx eps, double R, bool time, int nodes) {
  double dir = eps.imag() < 0 ? -1 : 1;
  cplx prev = dir * cplx(0, 1) * R;
  cplx sum = 0;
  for (int k = 0; k < nodes; ++k) {
    cplx e = std::polar(1.0, dir * 2 * kPi * k / nodes);
    cplx z = R * e;
    cplx v = closer(std::sqrt(2.0 * eps - 2.0 * V(n, z)), prev);
    prev = v;
    cplx dz = cplx(0, dir) * z;
    sum += (time ? 1.0 / v : v) * dz;
  }
  return sum * (2 * kPi / nodes);
}

cplx line_integral(int n, double x, double y, cplx eps, bool time) {
  double b = std::pow(n / 2.0, 1.0 / (n - 2));
  std::vector<double> knots{x, y, b};
  for (double r = std::sqrt(std::abs(eps)) / 8; r < y; r *= 1.5) knots.push_back(r);
  for (double d = std::abs(eps) / 8; d < 0.5 * b; d *= 1.5) {
    knots.push_back(b - d);
    knots.push_back(b + d);
  }
  std::sort(knots.begin(), knots.end());
  auto f = [&](double r) {
    cplx v = std::sqrt(2.0 * eps - 2.0 * V(n, r));
    return time ? 1.0 / v : v;
  };
  cplx sum = 0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    double a = std::max(knots[i - 1], x), c = std::min(knots[i], y);
    if (c > a) sum += simpson(f, a, c, 64);
  }
  return sum;
}

namespace {

template <class F>
State rk4_generic(F acc, cplx z, cplx v, double t, double h) {
  int steps = int(std::ceil(t / h));
  h = t / steps;
  for (int i = 0; i < steps; ++i) {
    cplx k1z = v, k1v = acc(z);
    cplx k2z = v + 0.5 * h * k1v, k2v = acc(z + 0.5 * h * k1z);
    cplx k3z = v + 0.5 * h * k2v, k3v = acc(z + 0.5 * h * k2z);
    cplx k4z = v + h * k3v, k4v = acc(z + h * k3z);
    z += h / 6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    v += h / 6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return {z, v};
}

}  // namespace

State rk4(int n, cplx z0, cplx v0, double t, double h) {
  return rk4_generic([n](cplx z) { return -dV(n, z); }, z0, v0, t, h);
}

State rk4_harmonic(cplx z0, cplx v0, double t, double h) {
  return rk4_generic([](cplx z) { return -z; }, z0, v0, t, h);
}

double quartic_period(double eps) {
  double s = std::sqrt(1 - 4 * eps);
  double r0sq = 1 - s, r1sq = 1 + s;
  auto f = [&](double th) -> cplx {
    double q = std::sin(th);
    return std::sqrt(2.0) / std::sqrt(r1sq - r0sq * q * q);
  };
  return 2 * simpson(f, -kPi / 2, kPi / 2, 2000).real();
}

cplx saddle_epsilon(int n, double x, double y, double t, int N, cplx seed) {
  double b = std::pow(n / 2.0, 1.0 / (n - 2));
  auto g = [&](cplx e) {
    double R = std::sqrt(std::sqrt(2 * std::abs(e)) * b);
    return double(N) * loop_integral(n, e, R, true) + line_integral(n, x, y, e, true) - t;
  };
  cplx e0 = seed, e1 = seed * cplx(1.001, 0.001);
  cplx g0 = g(e0), g1 = g(e1);
  cplx best = e1;
  double best_g = std::abs(g1);
  // Summing N cycle times leaves a residual floor that grows with t.
  const double floor = 1e-13 * t;
  for (int it = 0; it < 60 && g1 != g0; ++it) {
    cplx e2 = e1 - g1 * (e1 - e0) / (g1 - g0);
    e0 = e1;
    g0 = g1;
    e1 = e2;
    g1 = g(e1);
    if (std::abs(g1) < best_g) best = e1, best_g = std::abs(g1);
    if (std::abs(e1 - e0) < 1e-13 * std::abs(e1) || best_g < 1e-3 * floor) return best;
  }
  if (best_g < floor) return best;
  throw std::runtime_error("secant saddle solve did not converge");
}

double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<cplx> cn_evolve(std::vector<cplx> psi, const std::vector<cplx>& U, double h,
                            double dx, double dt, int steps) {
  std::size_t m = psi.size();
  const cplx I(0, 1);
  cplx off = -h * h / (2 * dx * dx);
  // (1 + i dt H / 2h) psi' = (1 - i dt H / 2h) psi with H tridiagonal, Dirichlet ends.
  cplx a = I * dt / (2 * h);
  std::vector<cplx> diag(m), rhs(m), c(m), d(m);
  for (std::size_t i = 0; i < m; ++i) diag[i] = h * h / (dx * dx) + U[i];
  for (int s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      cplx Hpsi = diag[i] * psi[i];
      if (i > 0) Hpsi += off * psi[i - 1];
      if (i + 1 < m) Hpsi += off * psi[i + 1];
      rhs[i] = psi[i] - a * Hpsi;
    }
    cplx lo = a * off;
    c[0] = lo / (1.0 + a * diag[0]);
    d[0] = rhs[0] / (1.0 + a * diag[0]);
    for (std::size_t i = 1; i < m; ++i) {
      cplx den = 1.0 + a * diag[i] - lo * c[i - 1];
      c[i] = lo / den;
      d[i] = (rhs[i] - lo * d[i - 1]) / den;
    }
    psi[m - 1] = d[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) psi[i] = d[i] - c[i] * psi[i + 1];
  }
  return psi;
}

}  // namespace oracle
