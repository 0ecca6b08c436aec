#include "rtb/contour.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "rtb/errors.hpp"
#include "rtb/quadrature.hpp"

namespace rtb {

namespace {

constexpr double kPi = std::numbers::pi;

cplx nearest_sign(cplx w, cplx target) {
  return std::abs(w - target) <= std::abs(w + target) ? w : -w;
}

// A step that turns the velocity by more than ~53 degrees cannot be trusted to stay on
// one sheet.
bool continuous(cplx v, cplx prev) { return std::abs(v - prev) < 0.5 * std::abs(v + prev); }

}  // namespace

BranchTrackedPath track_branch(const Potential& p, cplx eps, const std::vector<cplx>& points,
                               cplx anchor) {
  BranchTrackedPath out{points, {}, eps};
  out.velocity.reserve(points.size());
  cplx prev = anchor;
  for (std::size_t k = 0; k < points.size(); ++k) {
    cplx v = nearest_sign(std::sqrt(2.0 * eps - 2.0 * p.value(points[k])), prev);
    if (k > 0 && !continuous(v, prev))
      throw BranchAmbiguity("branch continuation step too coarse to decide the sheet");
    out.velocity.push_back(v);
    prev = v;
  }
  return out;
}

CycleGeometry cycle_geometry(const Potential& p, cplx eps, const ContourOptions& opt) {
  if (eps == cplx(0)) throw DomainError("cycle integral needs eps != 0");
  BranchPointPair bp = inner_branch_points(p, eps);
  CycleGeometry g;
  g.center = 0.5 * (bp.z_plus + bp.z_minus);
  g.half_width = 0.5 * std::abs(bp.z_plus - bp.z_minus);
  double nearest = std::numeric_limits<double>::infinity();
  for (cplx r : velocity_roots(p, eps)) {
    if (std::abs(r - bp.z_plus) < 1e-6 * g.half_width || std::abs(r - bp.z_minus) < 1e-6 * g.half_width)
      continue;
    nearest = std::min(nearest, std::abs(r - g.center));
  }
  g.isolation = nearest / g.half_width;
  if (g.isolation <= opt.isolation_factor)
    throw CutCollision("inner cut not isolated from the other branch points");
  double base = std::isfinite(nearest) ? std::sqrt(g.half_width * nearest) : 3.0 * g.half_width;
  g.radius = base * opt.radius_scale;
  if (g.radius <= 1.05 * g.half_width || (std::isfinite(nearest) && g.radius >= 0.95 * nearest))
    throw CutCollision("contour radius does not separate the inner cut from other roots");
  g.orientation = eps.imag() < 0 ? -1 : 1;
  g.anchor_point = g.center + g.radius;
  g.anchor_velocity = nearest_sign(std::sqrt(2.0 * eps - 2.0 * p.value(g.anchor_point)),
                                   double(g.orientation) * cplx(0, 1) * (g.anchor_point - g.center));
  return g;
}

CycleResult cycle_integral_detail(const Potential& p, cplx eps, bool time_integrand,
                                  const ContourOptions& opt) {
  CycleResult res;
  res.geometry = cycle_geometry(p, eps, opt);
  const CycleGeometry& g = res.geometry;
  auto trapezoid = [&](int m, double& closure) {
    cplx sum = 0, v = g.anchor_velocity;
    for (int k = 0; k <= m; ++k) {
      double th = 2 * kPi * k / m;
      cplx e = std::polar(1.0, g.orientation * th);
      cplx z = g.center + g.radius * e;
      cplx w = std::sqrt(2.0 * eps - 2.0 * p.value(z));
      cplx vn = nearest_sign(w, v);
      if (k > 0 && !continuous(vn, v))
        throw BranchAmbiguity("cycle contour too coarse for branch continuation");
      v = vn;
      if (k == m) break;
      cplx dz = cplx(0, g.orientation) * g.radius * e;
      sum += (time_integrand ? 1.0 / v : v) * dz;
    }
    closure = std::abs(v - g.anchor_velocity) / std::abs(g.anchor_velocity);
    return sum * (2 * kPi / m);
  };
  int m = opt.min_nodes;
  double closure = 0;
  cplx prev = trapezoid(m, closure);
  while (true) {
    m *= 2;
    cplx cur = trapezoid(m, closure);
    if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur) || m >= opt.max_nodes) {
      res.value = cur;
      res.nodes = m;
      res.closure_error = closure;
      if (m >= opt.max_nodes && std::abs(cur - prev) > opt.rel_tol * std::abs(cur))
        throw NoConvergence("cycle quadrature hit the node cap");
      return res;
    }
    prev = cur;
  }
}

cplx cycle_integral(const Potential& p, cplx eps, const ContourOptions& opt) {
  return cycle_integral_detail(p, eps, false, opt).value;
}

cplx cycle_time_integral(const Potential& p, cplx eps, const ContourOptions& opt) {
  return cycle_integral_detail(p, eps, true, opt).value;
}

cplx line_velocity(const Potential& p, cplx eps, double r) {
  return std::sqrt(2.0 * eps - 2.0 * p.value(r));
}

namespace {

// Breakpoints that resolve the near-singular zones around the origin and the exit point.
std::vector<double> line_breaks(const Potential& p, double x, double y, cplx eps) {
  double lo = std::min(x, y), hi = std::max(x, y);
  std::vector<double> br{lo, hi};
  double s = std::sqrt(2.0 * std::abs(eps));
  for (double r = s / 4; r < hi; r *= 2) {
    if (r > lo) br.push_back(r);
    if (-r > lo && -r < hi) br.push_back(-r);
  }
  if (p.has_barrier()) {
    double b = p.exit_point();
    double slope = std::abs(p.derivative(b));
    for (double d = std::abs(eps) / slope; d < 0.5 * b; d *= 4)
      for (double r : {b - d, b + d})
        if (r > lo && r < hi) br.push_back(r);
    if (b > lo && b < hi) br.push_back(b);
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

cplx line_integral(const Potential& p, double x, double y, cplx eps, bool time_integrand) {
  if (x == y) return 0.0;
  auto f = [&](double r) -> cplx {
    cplx w = 2.0 * eps - 2.0 * p.value(r);
    if (std::abs(w) < 1e-14) throw BranchAmbiguity("velocity vanishes on the real segment");
    cplx v = std::sqrt(w);
    return time_integrand ? 1.0 / v : v;
  };
  cplx val = quad::integrate_pieces(f, line_breaks(p, x, y, eps));
  return x < y ? val : -val;
}

}  // namespace

cplx real_line_S(const Potential& p, double x, double y, cplx eps) {
  if (x == y) return 0.0;
  if (eps == cplx(0)) {
    double b = p.exit_point();
    if (x < 0 || x > y) throw DomainError("real_line_S at eps=0 needs 0 <= x <= y");
    double e = euclidean_action(p, x, std::min(y, b));
    double f = y > b ? free_action(p, std::max(x, b), y) : 0.0;
    return cplx(f, e);
  }
  return line_integral(p, x, y, eps, false);
}

cplx real_line_time(const Potential& p, double x, double y, cplx eps) {
  if (eps == cplx(0)) throw DomainError("real-line time diverges at eps=0");
  return line_integral(p, x, y, eps, true);
}

cplx single_cycle_duration(const Potential& p, cplx eps, double r, double r_next) {
  return cycle_time_integral(p, eps) + real_line_time(p, r, r_next, eps);
}

double next_crossing_radius(const Potential& p, cplx eps, double r) {
  double target = cycle_time_integral(p, eps).imag();
  double rn = r;
  for (int it = 0; it < 60; ++it) {
    double g = target + real_line_time(p, r, rn, eps).imag();
    double dg = (1.0 / line_velocity(p, eps, rn)).imag();
    double step = g / dg;
    rn -= step;
    if (std::abs(step) < 1e-14 * std::abs(rn)) return rn;
  }
  throw NoConvergence("next crossing radius did not converge");
}

double closed_form_A_I(int n) {
  if (n % 2) throw DomainError("closed-form A_I exists for even n only");
  return 2 * std::tgamma((n + 1) / 2.0) / (n * std::sqrt(kPi) * std::tgamma(n / 2.0 + 1)) *
         std::pow(2.0, n / 2.0 - 1);
}

CorrectionLaw correction_law(const Potential& p) {
  int k = p.nonlinear_order();
  if (!k) return {0.0, 0.0, true};
  CorrectionLaw law;
  law.exponent = k % 2 ? k - 2.0 : k / 2.0 - 1;
  if (p.family_exponent() && k % 2 == 0) {
    law.A_I = closed_form_A_I(k);
    law.closed_form = true;
    return law;
  }
  // y(eps) = A eps^p + C eps^(2p) from two small real energies.
  double e1 = 0.01 * (p.has_barrier() ? p.peak_value() : 0.25), e2 = 0.5 * e1;
  auto y = [&](double e) { return (cycle_integral(p, e) / (2 * kPi * e) - 1.0).real(); };
  double a1 = std::pow(e1, law.exponent), a2 = std::pow(e2, law.exponent);
  double y1 = y(e1), y2 = y(e2);
  // Solve [a1 a1^2; a2 a2^2] [A; C] = [y1; y2].
  double det = a1 * a2 * a2 - a2 * a1 * a1;
  law.A_I = (y1 * a2 * a2 - y2 * a1 * a1) / det;
  return law;
}

double reference_scale(const Potential& p, cplx eps) {
  return std::sqrt(std::sqrt(2.0 * std::abs(eps)) * nonlinear_scale(p, eps));
}

std::vector<cplx> ray_samples(cplx eps_max, int count, double ratio) {
  std::vector<cplx> out;
  cplx e = eps_max;
  for (int i = 0; i < count; ++i, e *= ratio) out.push_back(e);
  return out;
}

namespace {

struct LinearFit {
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;
  double rss = 0, condition = 0;
};

// Least squares with column equilibration; condition number of the scaled design.
LinearFit least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (int j = 0; j < scale.size(); ++j)
    if (scale(j) == 0) scale(j) = 1;
  Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LinearFit fit;
  fit.condition = sv(0) / sv(sv.size() - 1);
  if (!(fit.condition < 1e12)) throw FitIllConditioned("design matrix condition number exceeds 1e12");
  Eigen::VectorXd cs = svd.solve(b);
  fit.coef = cs.cwiseQuotient(scale);
  fit.rss = (As * cs - b).squaredNorm();
  int dof = std::max<int>(1, int(A.rows() - A.cols()));
  Eigen::MatrixXd vinv = svd.matrixV() * sv.cwiseInverse().cwiseAbs2().asDiagonal() * svd.matrixV().transpose();
  fit.cov = (fit.rss / dof) * scale.cwiseInverse().asDiagonal() * vinv * scale.cwiseInverse().asDiagonal();
  return fit;
}

// Complex-coefficient fit of y = sum_j c_j f_j(eps); returns coefficients and relative rms.
std::pair<std::vector<cplx>, double> complex_fit(const std::vector<cplx>& eps,
                                                 const std::vector<cplx>& y,
                                                 const std::vector<double>& powers) {
  int m = int(eps.size()), k = int(powers.size());
  Eigen::MatrixXd A(2 * m, 2 * k);
  Eigen::VectorXd b(2 * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      cplx f = std::pow(eps[i], powers[j]);
      A(2 * i, 2 * j) = f.real();
      A(2 * i, 2 * j + 1) = -f.imag();
      A(2 * i + 1, 2 * j) = f.imag();
      A(2 * i + 1, 2 * j + 1) = f.real();
    }
    b(2 * i) = y[i].real();
    b(2 * i + 1) = y[i].imag();
  }
  LinearFit fit = least_squares(A, b);
  std::vector<cplx> c;
  for (int j = 0; j < k; ++j) c.emplace_back(fit.coef(2 * j), fit.coef(2 * j + 1));
  double rel = 0;
  for (int i = 0; i < m; ++i) {
    cplx model = 0;
    for (int j = 0; j < k; ++j) model += c[j] * std::pow(eps[i], powers[j]);
    rel += std::norm((model - y[i]) / y[i]);
  }
  return {c, std::sqrt(rel / m)};
}

}  // namespace

SeriesCoefficients extract_log_coefficient(const Potential& p, double x, double y,
                                           const std::vector<cplx>& samples) {
  if (samples.size() < 6) throw DomainError("log-coefficient fit needs at least 6 samples");
  double phase = std::arg(samples.front());
  for (cplx e : samples)
    if (e == cplx(0) || std::abs(std::remainder(std::arg(e) - phase, 2 * kPi)) > 1e-9)
      throw DomainError("samples must lie on a single ray");
  SeriesCoefficients out;
  out.samples = samples;
  int m = int(samples.size());

  // S(eps) = S0 + i A_S eps ln eps + B_S eps + C_S eps^2; the last term only soaks up
  // curvature that would otherwise leak into A_S.
  Eigen::MatrixXd A(2 * m, 7);
  Eigen::VectorXd b(2 * m);
  for (int i = 0; i < m; ++i) {
    cplx e = samples[i];
    cplx s = real_line_S(p, x, y, e);
    cplx l = cplx(0, 1) * e * std::log(e);
    cplx q = e * e;
    A.row(2 * i) << 1, 0, l.real(), e.real(), -e.imag(), q.real(), -q.imag();
    A.row(2 * i + 1) << 0, 1, l.imag(), e.imag(), e.real(), q.imag(), q.real();
    b(2 * i) = s.real();
    b(2 * i + 1) = s.imag();
  }
  LinearFit fit = least_squares(A, b);
  out.S0 = {fit.coef(0), fit.coef(1)};
  out.A_S = fit.coef(2);
  out.sigma_A_S = std::sqrt(std::max(0.0, fit.cov(2, 2)));
  out.B_S = {fit.coef(3), fit.coef(4)};
  out.C_S = {fit.coef(5), fit.coef(6)};
  out.residual_S = std::sqrt(fit.rss / (2 * m));
  out.condition = fit.condition;

  // Correction to the cycle integral, fitted with both candidate exponents.
  int k = p.nonlinear_order();
  std::vector<cplx> ys;
  for (cplx e : samples) ys.push_back(cycle_integral(p, e) / (2 * kPi * e) - 1.0);
  if (!k) {
    out.A_I = 0;
    return out;
  }
  double even_p = k / 2.0 - 1, odd_p = k - 2.0;
  out.exponent = k % 2 ? odd_p : even_p;
  out.alt_exponent = k % 2 ? even_p : odd_p;
  for (std::size_t i = 0; i < samples.size(); ++i)
    out.local_A_I.push_back(ys[i] / std::pow(samples[i], even_p));
  out.A_I = complex_fit(samples, ys, {out.exponent, 2 * out.exponent}).first[0];
  auto one = complex_fit(samples, ys, {out.exponent});
  auto alt = complex_fit(samples, ys, {out.alt_exponent});
  out.residual_I = one.second;
  out.A_I_alt = alt.first[0];
  out.residual_I_alt = alt.second;
  return out;
}

}  // namespace rtb
