#include "rtb/potential.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rtb/errors.hpp"
#include "rtb/ode.hpp"
#include "rtb/quadrature.hpp"

namespace rtb {

namespace {

// Roots of sum_k a_k z^k via the companion matrix, polished by Newton.
std::vector<cplx> poly_roots(const std::vector<cplx>& a) {
  int deg = int(a.size()) - 1;
  while (deg > 0 && a[deg] == cplx(0)) --deg;
  if (deg < 1) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -a[i] / a[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  for (auto& z : roots) {
    for (int it = 0; it < 3; ++it) {
      cplx p = 0, dp = 0;
      for (int k = deg; k >= 0; --k) {
        dp = dp * z + p;
        p = p * z + a[k];
      }
      if (dp == cplx(0)) break;
      z -= p / dp;
    }
  }
  return roots;
}

// Smallest positive real root of sum_k a_k x^k beyond lo, if any.
std::optional<double> first_positive_root(const std::vector<double>& a, double lo) {
  std::vector<cplx> ac(a.begin(), a.end());
  std::optional<double> best;
  for (cplx r : poly_roots(ac)) {
    if (std::abs(r.imag()) > 1e-9 * std::max(1.0, std::abs(r))) continue;
    if (r.real() > lo * (1 + 1e-12) && (!best || r.real() < *best)) best = r.real();
  }
  return best;
}

// V(b + s) = s * P(s) around the exit point, with P a polynomial (no cancellation near b).
std::vector<double> exit_quotient(const Potential& p) {
  const auto& c = p.coefficients();
  double b = p.exit_point();
  std::vector<double> d(c.size(), 0.0);
  for (std::size_t j = 0; j < c.size(); ++j) {
    double binom = 1;
    for (std::size_t k = 0; k <= j; ++k) {
      d[k] += c[j] * binom * std::pow(b, double(j - k));
      binom = binom * double(j - k) / double(k + 1);
    }
  }
  d.erase(d.begin());
  return d;
}

double eval_poly(const std::vector<double>& d, double s) {
  double acc = 0;
  for (std::size_t k = d.size(); k-- > 0;) acc = acc * s + d[k];
  return acc;
}

}  // namespace

Potential::Potential(std::vector<double> c, std::optional<int> n) : c_(std::move(c)), n_(n) {
  if (n_) {
    xp_ = 1.0;
    b_ = std::pow(*n_ / 2.0, 1.0 / (*n_ - 2));
    return;
  }
  if (degree() < 3) return;
  // V'(x)/x and V(x)/x^2 as polynomials.
  std::vector<double> dv, v;
  for (std::size_t k = 2; k < c_.size(); ++k) {
    dv.push_back(double(k) * c_[k]);
    v.push_back(c_[k]);
  }
  auto xp = first_positive_root(dv, 0.0);
  if (!xp || value(*xp) <= 0) return;
  auto b = first_positive_root(v, *xp);
  if (!b) return;
  xp_ = xp;
  b_ = b;
}

Potential Potential::family(int n) {
  if (n < 3) throw DomainError("potential exponent n must be >= 3");
  std::vector<double> c(n + 1, 0.0);
  c[2] = 0.5;
  c[n] = -1.0 / n;
  return Potential(std::move(c), n);
}

Potential Potential::harmonic() { return Potential({0.0, 0.0, 0.5}, std::nullopt); }

Potential Potential::polynomial(std::vector<double> c) {
  while (c.size() > 3 && c.back() == 0.0) c.pop_back();
  if (c.size() < 3 || c[0] != 0.0 || c[1] != 0.0 || std::abs(c[2] - 0.5) > 1e-15)
    throw DomainError("polynomial potential needs V(0)=V'(0)=0 and V''(0)=1");
  int deg = int(c.size()) - 1;
  bool family = deg >= 3 && std::abs(c[deg] + 1.0 / deg) < 1e-15;
  for (int k = 3; k < deg && family; ++k) family = c[k] == 0.0;
  return Potential(std::move(c), family ? std::optional<int>(deg) : std::nullopt);
}

int Potential::nonlinear_order() const {
  for (std::size_t k = 3; k < c_.size(); ++k)
    if (c_[k] != 0.0) return int(k);
  return 0;
}

double Potential::nonlinear_coefficient() const {
  int k = nonlinear_order();
  return k ? c_[k] : 0.0;
}

double Potential::peak() const {
  if (!xp_) throw DomainError("potential has no barrier");
  return *xp_;
}

double Potential::peak_value() const { return value(peak()); }

double Potential::exit_point() const {
  if (!b_) throw DomainError("potential has no barrier exit point");
  return *b_;
}

std::string Potential::describe() const {
  std::ostringstream os;
  if (n_) {
    os << "z^2/2 - z^" << *n_ << "/" << *n_;
    return os.str();
  }
  os.precision(17);
  os << "polynomial[";
  for (std::size_t k = 0; k < c_.size(); ++k) os << (k ? "," : "") << c_[k];
  os << "]";
  return os.str();
}

cplx eval_potential(const Potential& p, cplx z) { return p.value(z); }
cplx eval_potential_derivative(const Potential& p, cplx z) { return p.derivative(z); }

std::vector<cplx> velocity_roots(const Potential& p, cplx eps) {
  std::vector<cplx> a;
  for (double c : p.coefficients()) a.push_back(-2.0 * c);
  a[0] += 2.0 * eps;
  return poly_roots(a);
}

cplx branch_point_series(const Potential& p, cplx eps, int s) {
  cplx delta = double(s) * std::sqrt(2.0 * eps);
  int k = p.nonlinear_order();
  if (!k) return delta;
  return delta * (1.0 - p.nonlinear_coefficient() * std::pow(delta, k - 2));
}

BranchPointPair inner_branch_points(const Potential& p, cplx eps) {
  if (eps == cplx(0)) return {0.0, 0.0, eps};
  if (p.has_barrier() && std::abs(eps) >= p.peak_value())
    throw DomainError("|eps| must lie below the barrier height");
  double delta = std::sqrt(2.0 * std::abs(eps));
  auto refine = [&](int s) {
    cplx seed = branch_point_series(p, eps, s);
    cplx z = seed;
    for (int it = 0; it < 50; ++it) {
      cplx f = 2.0 * eps - 2.0 * p.value(z);
      cplx df = -2.0 * p.derivative(z);
      cplx dz = f / df;
      z -= dz;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
      if (std::abs(dz) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(z)) {
        if (std::abs(z - seed) > 0.5 * delta)
          throw AmbiguousRoot("Newton left the neighbourhood of the series seed");
        return z;
      }
    }
    throw NoConvergence("branch point refinement did not converge in 50 iterations");
  };
  BranchPointPair out{refine(-1), refine(+1), eps};
  if (std::abs(out.z_plus - out.z_minus) < 0.5 * delta)
    throw AmbiguousRoot("inner branch points collided");
  return out;
}

double barrier_exit_point(const Potential& p) { return p.exit_point(); }

double nonlinear_scale(const Potential& p, cplx eps) {
  if (eps == cplx(0)) throw DomainError("nonlinear scale needs eps != 0");
  int k = p.nonlinear_order();
  if (!k) return std::numeric_limits<double>::infinity();
  return std::pow(std::abs(eps) / std::abs(p.nonlinear_coefficient()), 1.0 / k);
}

bool scales_separated(const Potential& p, cplx eps, double margin) {
  return margin * std::sqrt(2.0 * std::abs(eps)) < nonlinear_scale(p, eps);
}

double zero_energy_momentum(const Potential& p, double y) {
  double v = p.value(y);
  // Rounding at the exit point itself leaves V(b) a few ulps above zero.
  if (p.has_barrier() && std::abs(y - p.exit_point()) <= 1e-12 * y) return 0.0;
  if (v > 0) throw DomainError("zero-energy momentum needs V(y) <= 0");
  return std::sqrt(-2.0 * v);
}

double euclidean_action(const Potential& p, double x1, double x2) {
  double b = p.exit_point();
  if (x1 < 0 || x2 > b || x1 > x2) throw DomainError("euclidean_action needs 0 <= x1 <= x2 <= b");
  if (x1 == x2) return 0.0;
  auto f = [&](double r) { return std::sqrt(std::max(0.0, 2.0 * p.value(r))); };
  if (x2 < b) return quad::integrate(f, x1, x2);
  // r = b - u^2 on the half next to the exit point.
  auto P = exit_quotient(p);
  double m = 0.5 * (x1 + b);
  double near = quad::integrate(
      [&](double u) { return 2 * u * u * std::sqrt(std::max(0.0, -2 * eval_poly(P, -u * u))); }, 0.0,
      std::sqrt(b - m));
  return quad::integrate(f, x1, m) + near;
}

double free_action(const Potential& p, double y1, double y2) {
  double b = p.exit_point();
  if (y1 < b || y1 > y2) throw DomainError("free_action needs b <= y1 <= y2");
  if (y1 == y2) return 0.0;
  auto f = [&](double r) { return std::sqrt(std::max(0.0, -2.0 * p.value(r))); };
  if (y1 > b) return quad::integrate(f, y1, y2);
  auto P = exit_quotient(p);
  double m = 0.5 * (b + y2);
  double near = quad::integrate(
      [&](double u) { return 2 * u * u * std::sqrt(std::max(0.0, -2 * eval_poly(P, u * u))); }, 0.0,
      std::sqrt(m - b));
  return near + quad::integrate(f, m, y2);
}

WkbQuantities wkb_actions(const Potential& p, double x, double y) {
  double b = p.exit_point();
  if (x < 0 || x > b || y < b) throw DomainError("wkb_actions needs 0 <= x <= b <= y");
  return {euclidean_action(p, x, b), free_action(p, b, y), b, zero_energy_momentum(p, y)};
}

double bounce_profile(const Potential& p, double r) {
  double b = p.exit_point();
  if (!(r > 0) || r > b) throw DomainError("bounce_profile needs 0 < r <= b");
  if (r == b) return 0.0;
  // r' = b - u^2 near the exit point.
  auto P = exit_quotient(p);
  auto near_b = [&](double u) { return 2 / std::sqrt(-2 * eval_poly(P, -u * u)); };
  double mid = 0.5 * b;
  if (r >= mid) return quad::integrate(near_b, 0.0, std::sqrt(b - r));
  // Near the origin the integrand is ~1/r; integrate in s = ln r.
  double inner = quad::integrate(
      [&](double s) { double e = std::exp(s); return e / std::sqrt(2 * p.value(e)); },
      std::log(r), std::log(mid));
  return inner + quad::integrate(near_b, 0.0, std::sqrt(b - mid));
}

BounceIdentity bounce_identity(const Potential& p, double r_min) {
  double b = p.exit_point();
  if (!(r_min > 0) || r_min >= b) throw DomainError("bounce_identity needs 0 < r_min < b");
  // Euclidean motion in -V starting at rest at the exit point: r'' = V'(r).
  using Stepper = ode::Dopri5<long double, long double, 3>;
  auto rhs = [&](long double, const Stepper::State& y) {
    long double r = y[0], rd = y[1];
    return Stepper::State{rd, p.derivative(r), rd * rd / 2 + p.value(r)};
  };
  ode::StepControl ctl{1e-14L, 1e-16L, 0.05L, 1e-14L};
  Stepper st(rhs, ctl);
  Stepper::State y0{b, 0.0L, 0.0L}, at_hit{};
  long double t_hit = -1;
  st.run(0.0L, y0, 1e4L, [&](long double t0, const Stepper::State& y, const Stepper::State& f,
                             long double t1, const Stepper::State& y1, const Stepper::State&) {
    if (y1[0] > r_min) return ode::StepVerdict::Accept;
    // Locate the crossing on the cubic interpolant, then land on it with one exact step.
    long double lo = 0, hi = 1, h = t1 - t0;
    Stepper::State f1 = rhs(t1, y1);
    for (int it = 0; it < 80; ++it) {
      long double mid = 0.5L * (lo + hi);
      long double r = ode::hermite3(mid, h, y[0], f[0], y1[0], f1[0]);
      (r > r_min ? lo : hi) = mid;
    }
    Stepper::State ys, fs;
    st.trial(t0, y, f, hi * h, ys, fs);
    t_hit = t0 + hi * h;
    at_hit = ys;
    return ode::StepVerdict::Stop;
  });
  if (t_hit < 0) throw NoConvergence("bounce ODE did not reach r_min");
  BounceIdentity out;
  out.r_min = r_min;
  out.tau_end = double(t_hit);
  out.S_E_bounce = double(at_hit[2]);
  out.S_E_static = euclidean_action(p, r_min, b);
  out.tau_profile = bounce_profile(p, r_min);
  return out;
}

}  // namespace rtb
