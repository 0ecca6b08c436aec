#include "rtb/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <thread>

#include "rtb/errors.hpp"

namespace rtb {

namespace {

// Constant tridiagonal system (1 + c H) psi = rhs with H = -hbar^2/2 D2 + U, solved by a
// prefactored Thomas sweep.
class Tridiagonal {
 public:
  Tridiagonal(const std::vector<cplx>& U, double hbar, double dx, cplx c)
      : off_(-hbar * hbar / (2 * dx * dx)), c_(c), diag_(U.size()), cp_(U.size()), inv_(U.size()) {
    cplx o = c * off_;
    for (std::size_t k = 0; k < U.size(); ++k) diag_[k] = hbar * hbar / (dx * dx) + U[k];
    for (std::size_t k = 0; k < U.size(); ++k) {
      cplx den = 1.0 + c * diag_[k] - (k ? o * cp_[k - 1] : cplx(0));
      inv_[k] = 1.0 / den;
      cp_[k] = o * inv_[k];
    }
  }

  // psi <- (1 + cH)^-1 (1 - cH) psi
  void step(std::vector<cplx>& psi, std::vector<cplx>& work) const {
    const std::size_t M = psi.size();
    cplx o = c_ * off_;
    for (std::size_t k = 0; k < M; ++k) {
      cplx r = (1.0 - c_ * diag_[k]) * psi[k];
      if (k) r -= o * psi[k - 1];
      if (k + 1 < M) r -= o * psi[k + 1];
      work[k] = (r - (k ? o * work[k - 1] : cplx(0))) * inv_[k];
    }
    psi[M - 1] = work[M - 1];
    for (std::size_t k = M - 1; k-- > 0;) psi[k] = work[k] - cp_[k] * psi[k + 1];
  }

 private:
  double off_;
  cplx c_;
  std::vector<cplx> diag_, cp_, inv_;
};

std::size_t index_below(const GridSpec& g, double y) {
  return std::size_t(std::floor((y - g.x_min) / g.dx));
}

double node_current(const GridSpec& g, const std::vector<cplx>& psi, std::size_t i) {
  cplx d = (psi[i + 1] - psi[i - 1]) / (2 * g.dx);
  return g.hbar_eff * (std::conj(psi[i]) * d).imag();
}

double region_probability(const GridSpec& g, const std::vector<cplx>& psi, double y) {
  double s = 0;
  std::size_t lo = std::size_t(std::ceil((-y - g.x_min) / g.dx - 1e-9));
  std::size_t hi = std::min(index_below(g, y + 1e-9 * g.dx), psi.size() - 1);
  for (std::size_t k = lo; k <= hi; ++k) s += std::norm(psi[k]);
  return s * g.dx;
}

}  // namespace

std::vector<double> grid_points(const GridSpec& g) {
  std::size_t M = std::size_t(std::llround((g.x_max - g.x_min) / g.dx)) + 1;
  std::vector<double> x(M);
  for (std::size_t k = 0; k < M; ++k) x[k] = g.x_min + double(k) * g.dx;
  return x;
}

void validate_grid(const GridSpec& g, const OracleConfig& c) {
  if (!(g.dx > 0) || !(g.dt > 0) || !(g.hbar_eff > 0) || !(g.x_max > g.x_min))
    throw DomainError("grid needs dx > 0, dt > 0, hbar_eff > 0 and x_max > x_min");
  double x_abs = g.x_max - c.absorber_fraction * (g.x_max - g.x_min) / 2;
  for (double y : c.probes)
    if (!(y < x_abs) || !(-y > g.x_min + c.absorber_fraction * (g.x_max - g.x_min) / 2))
      throw DomainError("probe points must lie inside the unabsorbed region");
}

std::vector<double> capped_potential(const Potential& p, const std::vector<double>& x,
                                     double cap_factor) {
  std::vector<double> V(x.size());
  double xc = p.has_barrier() ? cap_factor * p.exit_point() : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    double r = x[k];
    if (r > xc)
      V[k] = p.value(xc) + p.derivative(xc) * (r - xc);
    else if (r < -xc)
      V[k] = p.value(-xc) + p.derivative(-xc) * (r + xc);
    else
      V[k] = p.value(r);
  }
  return V;
}

std::vector<cplx> prepare_initial_state(const GridSpec& g) {
  std::vector<double> x = grid_points(g);
  std::vector<cplx> psi(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) psi[k] = std::exp(-x[k] * x[k] / (2 * g.hbar_eff));
  double s = std::sqrt(norm(g, psi));
  for (auto& v : psi) v /= s;
  return psi;
}

double norm(const GridSpec& g, const std::vector<cplx>& psi) {
  double s = 0;
  for (const auto& v : psi) s += std::norm(v);
  return s * g.dx;
}

double mean_position(const GridSpec& g, const std::vector<cplx>& psi) {
  double s = 0, w = 0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    double d = std::norm(psi[k]);
    s += d * (g.x_min + double(k) * g.dx);
    w += d;
  }
  return s / w;
}

double energy_expectation(const Potential& p, const GridSpec& g, const std::vector<cplx>& psi) {
  const double h = g.hbar_eff, dx = g.dx;
  cplx e = 0;
  double w = 0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    cplx l = k ? psi[k - 1] : cplx(0), r = k + 1 < psi.size() ? psi[k + 1] : cplx(0);
    cplx Hpsi = -h * h / 2 * (l - 2.0 * psi[k] + r) / (dx * dx) +
                p.value(g.x_min + double(k) * dx) * psi[k];
    e += std::conj(psi[k]) * Hpsi;
    w += std::norm(psi[k]);
  }
  return e.real() / w;
}

std::vector<cplx> relax_initial_state(const Potential& p, const OracleConfig& c,
                                      std::vector<cplx> psi) {
  const GridSpec& g = c.grid;
  std::vector<double> x = grid_points(g);
  std::vector<cplx> U(x.size());
  double xp = p.has_barrier() ? p.peak() : std::numeric_limits<double>::infinity();
  double Vp = p.has_barrier() ? p.peak_value() : 0;
  for (std::size_t k = 0; k < x.size(); ++k) U[k] = std::abs(x[k]) > xp ? Vp : p.value(x[k]);
  Tridiagonal A(U, g.hbar_eff, g.dx, c.relax_dtau / (2 * g.hbar_eff));
  std::vector<cplx> work(psi.size());
  for (int s = 0; s < c.relax_steps; ++s) {
    A.step(psi, work);
    double n = std::sqrt(norm(g, psi));
    for (auto& v : psi) v /= n;
  }
  return psi;
}

double probability_current(const GridSpec& g, const std::vector<cplx>& psi, double y) {
  std::size_t i = index_below(g, y);
  if (i < 1 || i + 2 >= psi.size()) throw DomainError("current probe too close to the grid edge");
  double f = (y - (g.x_min + double(i) * g.dx)) / g.dx;
  return (1 - f) * node_current(g, psi, i) + f * node_current(g, psi, i + 1);
}

OracleRun evolve(const Potential& p, const OracleConfig& c, const std::vector<cplx>& psi0,
                 std::vector<cplx>* psi_final) {
  const GridSpec& g = c.grid;
  validate_grid(g, c);
  OracleRun run;
  run.config = c;
  run.x = grid_points(g);
  if (psi0.size() != run.x.size()) throw DomainError("initial state does not match the grid");
  run.V = capped_potential(p, run.x, c.cap_factor);

  const double half = (g.x_max - g.x_min) / 2, mid = (g.x_max + g.x_min) / 2;
  const double x_abs = half * (1 - c.absorber_fraction);
  std::vector<cplx> U(run.x.size());
  double vmax = 0;
  for (std::size_t k = 0; k < run.x.size(); ++k) {
    double d = std::abs(run.x[k] - mid);
    double W = c.absorber && d > x_abs ? c.absorber_strength * std::pow((d - x_abs) / (half - x_abs), 2) : 0;
    U[k] = cplx(run.V[k], -W);
    if (std::abs(run.x[k]) <= c.probes.front() + 0.5) vmax = std::max(vmax, std::abs(run.V[k]));
  }
  run.cfl_number = g.dt * vmax / g.hbar_eff;
  run.cfl_warning = run.cfl_number > 0.5;

  Tridiagonal A(U, g.hbar_eff, g.dx, cplx(0, g.dt / (2 * g.hbar_eff)));
  std::vector<cplx> psi = psi0, work(psi.size());
  const double y = c.probes.front();
  auto record = [&](double t) {
    OracleSample s;
    s.t = t;
    s.P = region_probability(g, psi, y);
    s.norm = norm(g, psi);
    s.mean_x = mean_position(g, psi);
    s.j_left = probability_current(g, psi, -y);
    for (double q : c.probes) s.j.push_back(probability_current(g, psi, q));
    run.samples.push_back(std::move(s));
  };
  record(0);
  const long steps = std::lround(c.t_end / g.dt);
  for (long k = 1; k <= steps; ++k) {
    A.step(psi, work);
    if (k % c.record_every == 0) record(double(k) * g.dt);
  }
  if (psi_final) *psi_final = std::move(psi);
  return run;
}

OracleRun run_oracle(const Potential& p, const OracleConfig& c) {
  std::vector<cplx> psi = prepare_initial_state(c.grid);
  if (c.relax) psi = relax_initial_state(p, c, std::move(psi));
  return evolve(p, c, psi);
}

DecayFit fit_gamma(const OracleRun& run, std::size_t probe) {
  if (probe >= run.config.probes.size()) throw DomainError("probe index out of range");
  DecayFit fit;
  fit.t_end = run.config.t_end;
  fit.t_start = fit.t_end / 2;
  std::vector<double> t, rate, lnP;
  for (const auto& s : run.samples)
    if (s.t >= fit.t_start) {
      t.push_back(s.t);
      // Outflow through both ends of [-y, y]; for probe != 0 the right end moves to that probe.
      double jr = s.j[probe];
      rate.push_back((jr - s.j_left) / s.P);
      lnP.push_back(std::log(s.P));
    }
  const std::size_t m = t.size();
  if (m < 10) throw NoExponentialWindow("too few samples in the decay window");

  auto linear = [&](const std::vector<double>& yv, double& slope, double& r2) {
    Eigen::MatrixXd A(m, 2);
    Eigen::VectorXd b(m);
    for (std::size_t i = 0; i < m; ++i) A(i, 0) = 1, A(i, 1) = t[i] - t[0], b(i) = yv[i];
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    double mean = b.mean();
    double ss_tot = (b.array() - mean).square().sum();
    double ss_res = (A * c - b).squaredNorm();
    slope = c(1);
    r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 0;
  };

  // Accumulated outflow Q(t) = int rate dt is linear in a clean exponential window.
  std::vector<double> Q(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) Q[i] = Q[i - 1] + 0.5 * (rate[i] + rate[i - 1]) * (t[i] - t[i - 1]);
  double slope = 0;
  linear(Q, slope, fit.r_squared);
  fit.gamma = slope;
  linear(lnP, slope, fit.r_squared_population);
  fit.gamma_population = -slope;
  if (!(fit.gamma > 0) || fit.r_squared < 0.99)
    throw NoExponentialWindow("no exponential decay window with r^2 > 0.99");
  return fit;
}

RateSweep rate_sweep(const Potential& p, const OracleConfig& base, const std::vector<double>& hbars) {
  RateSweep out;
  out.hbar = hbars;
  const std::size_t k = hbars.size();
  std::vector<OracleRun> runs(k);
  std::vector<std::exception_ptr> errors(k);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < k; ++i)
    pool.emplace_back([&, i] {
      try {
        OracleConfig c = base;
        c.grid.hbar_eff = hbars[i];
        runs[i] = run_oracle(p, c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < k; ++i) {
    out.fits.push_back(fit_gamma(runs[i]));
    out.cfl_warning.push_back(runs[i].cfl_warning);
    double a = 0, b = 0;
    if (runs[i].config.probes.size() > 1) {
      for (const auto& s : runs[i].samples)
        if (s.t >= out.fits.back().t_start) a += s.j[1], b += s.j[0];
      out.probe_ratio.push_back(a / b);
    }
  }
  if (k >= 2) {
    Eigen::MatrixXd A(k, 2);
    Eigen::VectorXd b(k);
    for (std::size_t i = 0; i < k; ++i) A(i, 0) = 1, A(i, 1) = 1 / hbars[i], b(i) = std::log(out.fits[i].gamma);
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    out.intercept = c(0);
    out.slope = c(1);
    out.has_slope = true;
  }
  if (p.has_barrier()) {
    out.expected_slope = -2 * euclidean_action(p, 0, p.exit_point());
    out.off_exponent = out.has_slope && std::abs(out.slope / out.expected_slope - 1) > 0.1;
  }
  return out;
}

}  // namespace rtb
