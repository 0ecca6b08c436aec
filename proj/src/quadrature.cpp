#include "rtb/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <queue>

namespace rtb::quad {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

// Global adaptive bisection driven by the single-panel 31-point Kronrod rule. Each panel
// is mapped onto [-1, 1] before the rule is applied, so error estimates are consistent
// for panels of any length.
template <class T, class F>
T adaptive(const F& f, double a, double b, double tol) {
  struct Panel {
    double a, b;
    T value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto panel = [&](double lo, double hi) {
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double err = 0;
    T v = GK::integrate([&](double x) -> T { return f(mid + half * x); }, -1.0, 1.0, 0, 0.0, &err);
    return Panel{lo, hi, v * half, err * std::abs(half)};
  };
  std::priority_queue<Panel> heap;
  heap.push(panel(a, b));
  T total = heap.top().value;
  double total_err = heap.top().error;
  for (int it = 0; it < 4000; ++it) {
    if (total_err <= tol * std::abs(total) || total_err < 1e-300) break;
    Panel worst = heap.top();
    heap.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) {
      heap.push(worst);
      break;
    }
    Panel left = panel(worst.a, mid), right = panel(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed accumulated update rounding.
  T sum = T(0);
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

}  // namespace

double integrate(const RealFn& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  return adaptive<double>(f, a, b, tol);
}

std::complex<double> integrate_complex(const CplxFn& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  return adaptive<std::complex<double>>(f, a, b, tol);
}

std::complex<double> integrate_pieces(const CplxFn& f, const std::vector<double>& breaks,
                                      double tol) {
  std::complex<double> sum = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    sum += integrate_complex(f, breaks[i], breaks[i + 1], tol);
  return sum;
}

}  // namespace rtb::quad
