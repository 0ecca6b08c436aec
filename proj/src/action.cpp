#include "rtb/action.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rtb/quadrature.hpp"

namespace rtb {

cplx action_direct(const Trajectory& tr) {
  if (tr.points.size() < 2) return tr.points.empty() ? tr.final.S : cplx(0);
  std::vector<double> breaks;
  breaks.reserve(tr.points.size());
  for (const auto& q : tr.points)
    if (breaks.empty() || q.t > breaks.back()) breaks.push_back(q.t);
  if (breaks.size() < 2) return 0;
  auto L = [&](double t) {
    TrajectoryPoint q = tr.sample(t);
    return 0.5 * q.v * q.v - tr.potential.value(q.z);
  };
  return quad::integrate_pieces(L, breaks, 1e-12);
}

cplx expansion_correction(const Potential& p, cplx eps) {
  int n = p.nonlinear_order();
  if (!n) throw DomainError("expansion needs a nonlinear potential");
  double im = std::pow(eps, n / 2.0 - 1).imag();
  if (std::abs(im) <= 1e-12 * std::pow(std::abs(eps), n / 2.0 - 1))
    throw PhaseConstraintViolated("Im eps^(n/2-1) vanishes");
  return (0.5 - 1.0 / n) * std::pow(eps, n / 2.0) * std::log(std::abs(eps)) / im;
}

cplx action_expansion(const Potential& p, double x, double y, cplx eps) {
  cplx corr = expansion_correction(p, eps);
  return real_line_S(p, x, y, 0) + corr;
}

ActionBreakdown action_decomposed(const Potential& p, const SaddleSolution& s) {
  ActionBreakdown a;
  a.epsilon = s.epsilon;
  a.N = s.N;
  a.t = s.t;
  a.x = s.x;
  a.y = s.y;
  a.kept = s.kept;
  cplx eps = s.epsilon;
  a.I_cycle = cycle_integral(p, eps);
  a.I_zc = double(s.N) * a.I_cycle;
  a.S_line = real_line_S(p, s.x, s.y, eps);
  a.eps_t = eps * s.t;
  a.S_contour = a.I_zc + a.S_line - a.eps_t;

  // eps dF/deps along the ray: (F(eps(1+h)) - F(eps(1-h))) / 2h.
  auto F = [&](cplx e) { return double(s.N) * cycle_integral(p, e) + real_line_S(p, s.x, s.y, e); };
  const double h = 1e-4;
  a.S_shortcut = a.I_zc + a.S_line - (F(eps * (1 + h)) - F(eps * (1 - h))) / (2 * h);
  a.shortcut_rel_diff = std::abs(a.S_shortcut - a.S_contour) / std::abs(a.S_contour);
  a.S_expansion = action_expansion(p, s.x, s.y, eps);

  if (s.shooting) {
    a.S_direct = s.shooting->S_direct;
    a.direct_rel_diff = std::abs(*a.S_direct - a.S_contour) / std::abs(*a.S_direct);
  }
  if (p.has_barrier() && s.x <= p.exit_point() && s.y >= p.exit_point()) {
    WkbQuantities w = wkb_actions(p, s.x, s.y);
    a.S_E = w.S_E;
    a.S_free = w.S_free;
  }
  return a;
}

Factorization factorize(const ActionBreakdown& a) {
  cplx iS = cplx(0, 1) * a.S_contour;
  return {-iS.real(), iS.imag(), a.S_E, a.S_free};
}

FactorizationLimit extrapolate_factorization(const Potential& p,
                                             const std::vector<ActionBreakdown>& sweep) {
  if (sweep.size() < 3) throw DomainError("extrapolation needs at least 3 saddles");
  int m = int(sweep.size());
  // Complex unknowns S0, K and the non-log companion L of the same order:
  // S = S0 + K c(eps) + L c(eps) / ln|eps|.
  const bool companion = m >= 4;
  const int cols = companion ? 6 : 4;
  Eigen::MatrixXd A(2 * m, cols);
  Eigen::VectorXd b(2 * m);
  for (int i = 0; i < m; ++i) {
    cplx f = expansion_correction(p, sweep[i].epsilon);
    A(2 * i, 0) = 1, A(2 * i, 1) = 0, A(2 * i, 2) = f.real(), A(2 * i, 3) = -f.imag();
    A(2 * i + 1, 0) = 0, A(2 * i + 1, 1) = 1, A(2 * i + 1, 2) = f.imag(), A(2 * i + 1, 3) = f.real();
    if (companion) {
      cplx g = f / std::log(std::abs(sweep[i].epsilon));
      A(2 * i, 4) = g.real(), A(2 * i, 5) = -g.imag();
      A(2 * i + 1, 4) = g.imag(), A(2 * i + 1, 5) = g.real();
    }
    b(2 * i) = sweep[i].S_contour.real();
    b(2 * i + 1) = sweep[i].S_contour.imag();
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  FactorizationLimit out;
  out.S0 = {c(0), c(1)};
  out.K = {c(2), c(3)};
  if (companion) out.L = {c(4), c(5)};
  cplx iS = cplx(0, 1) * out.S0;
  out.S_E = -iS.real();
  out.S_free = iS.imag();
  out.rms_residual = std::sqrt((A * c - b).squaredNorm() / (2 * m));
  for (const auto& a : sweep) out.raw_deviation.push_back(std::abs(a.S_contour - out.S0));
  return out;
}

double matched_exponent(const Potential& p, double x) {
  return 0.5 * x * x + euclidean_action(p, x, p.exit_point());
}

}  // namespace rtb
