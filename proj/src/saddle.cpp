#include "rtb/saddle.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <numbers>

namespace rtb {

namespace {

constexpr double kPi = std::numbers::pi;

struct Law {
  double p = 0, A_I = 0;
  int k = 0;
};

Law law_of(const Potential& p) {
  int k = p.nonlinear_order();
  if (!k) throw DomainError("the cycle-count law needs a nonlinear potential");
  CorrectionLaw c = correction_law(p);
  return {c.exponent, c.A_I, k};
}

double im_power(cplx eps, double p) {
  double im = std::pow(eps, p).imag();
  if (std::abs(im) <= 1e-12 * std::pow(std::abs(eps), p))
    throw PhaseConstraintViolated("Im eps^p vanishes: the orbit closes and never exits");
  return im;
}

// Solve N(r e^{i phi}) = target for r; N is decreasing in r below the barrier scale.
double solve_on_ray(const Potential& p, double phase, double target,
                    const std::function<double(cplx)>& N) {
  double hi = std::log(0.2 * p.peak_value()), lo = std::log(1e-14);
  auto g = [&](double lr) { return N(std::polar(std::exp(lr), phase)) - target; };
  double glo = g(lo), ghi = g(hi);
  if (!(glo > 0 && ghi < 0)) throw NoConvergence("cycle-count target outside the searchable range");
  boost::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                             boost::math::tools::eps_tolerance<double>(50), it);
  return std::exp(0.5 * (r.first + r.second));
}

}  // namespace

IntegratorConfig shooting_config() {
  IntegratorConfig c;
  c.rel_tol = 1e-15;
  c.abs_tol = 1e-17;
  c.max_step = 0.1;
  c.escape_radius = 1e7;
  c.store_points = false;
  return c;
}

cplx epsilon_to_time(const Potential& p, double x, double y, cplx eps, int N) {
  if (N < 1) throw DomainError("cycle count must be at least 1");
  return double(N) * cycle_time_integral(p, eps) + real_line_time(p, x, y, eps);
}

cplx epsilon_to_time_derivative(const Potential& p, double x, double y, cplx eps, int N) {
  double h = 1e-4 * std::abs(eps);
  return (epsilon_to_time(p, x, y, eps + h, N) - epsilon_to_time(p, x, y, eps - h, N)) / (2 * h);
}

double n_of_epsilon(const Potential& p, cplx eps) {
  Law L = law_of(p);
  return 0.5 * -std::log(std::abs(eps)) / (2 * kPi * (L.p + 1) * L.A_I * im_power(eps, L.p));
}

double n_of_epsilon_corrected(const Potential& p, cplx eps, double A_S, cplx B_S) {
  Law L = law_of(p);
  double num = -A_S * (std::log(std::abs(eps)) + 1) - B_S.imag();
  return num / (2 * kPi * (L.p + 1) * L.A_I * im_power(eps, L.p));
}

cplx default_seed(const Potential& p, double t) {
  Law L = law_of(p);
  double phase = kPi / (2 * L.p);
  double r = solve_on_ray(p, phase, t / (2 * kPi), [&](cplx e) { return n_of_epsilon(p, e); });
  return std::polar(r, phase);
}

cplx saddle_action(const Potential& p, double x, double y, cplx eps, int N, double t) {
  return double(N) * cycle_integral(p, eps) + real_line_S(p, x, y, eps) - eps * t;
}

SaddleSolution solve_saddle(const Potential& p, double x, double y, double t,
                            const SaddleOptions& opt) {
  if (!(t > 2 * kPi)) throw DomainError("target time must exceed one harmonic period 2 pi");
  if (!p.has_barrier()) throw NoConvergence("no barrier exit: a tunneling saddle does not exist");
  double b = p.exit_point();
  if (!(y > b)) throw DomainError("endpoint y must lie beyond the barrier exit b");
  if (!(x >= 0 && x < b)) throw DomainError("start x must lie in [0, b)");

  SaddleSolution s;
  s.x = x;
  s.y = y;
  s.t = t;
  cplx eps = opt.seed ? *opt.seed : default_seed(p, t);
  Law L = law_of(p);
  const double seed_side = im_power(eps, L.p);

  if (opt.N) {
    s.N = *opt.N;
  } else {
    cplx n = (t - real_line_time(p, x, y, eps)) / cycle_time_integral(p, eps);
    s.N = int(std::lround(n.real()));
  }
  if (s.N < 1) throw DomainError("target time too short for a single inner cycle");

  auto residual = [&](cplx e) { return epsilon_to_time(p, x, y, e, s.N) - t; };
  cplx F = residual(eps);
  s.history.push_back({eps, F, 1});
  const double goal = opt.rel_tol * t;
  for (int it = 0; it < opt.max_iter && std::abs(F) >= goal; ++it) {
    cplx step = -F / epsilon_to_time_derivative(p, x, y, eps, s.N);
    if (std::abs(step) > 0.5 * std::abs(eps)) step *= 0.5 * std::abs(eps) / std::abs(step);
    double lambda = 1;
    bool moved = false;
    for (int k = 0; k < 12; ++k, lambda *= 0.5) {
      cplx trial = eps + lambda * step;
      try {
        cplx Ft = residual(trial);
        if (std::abs(Ft) < std::abs(F)) {
          eps = trial;
          F = Ft;
          moved = true;
          break;
        }
      } catch (const CutCollision&) {
      } catch (const BranchAmbiguity&) {
      }
    }
    s.history.push_back({eps, F, lambda});
    if (!moved) break;
  }
  s.epsilon = eps;
  s.residual = F;
  s.converged = std::abs(F) < goal;
  if (!s.converged) throw SaddleNoConvergence("Newton on the time map stalled", s);

  if ((im_power(eps, L.p) > 0) != (seed_side > 0))
    throw WrongBasin("Newton left the seed's spiral direction (sign of Im eps^p flipped)");

  s.action = saddle_action(p, x, y, eps, s.N, t);
  s.conjugate_action = saddle_action(p, x, y, std::conj(eps), s.N, t);
  s.kept = (cplx(0, 1) * s.action).real() < 0;

  if (opt.verify_ode) s.shooting = verify_by_shooting(p, s, opt);
  return s;
}

ShootingReport verify_by_shooting(const Potential& p, const SaddleSolution& s,
                                  const SaddleOptions& opt) {
  IntegratorConfig cfg = opt.ode;
  cfg.t_max = s.t;
  cfg.stop_at.reset();
  ShootingReport rep;
  cplx eps = s.epsilon;
  auto run = [&](cplx e) {
    Trajectory tr = integrate_eom(p, s.x, e, 1, cfg);
    rep.endpoint = tr.final.z;
    rep.mismatch = std::abs(tr.final.z - s.y);
    rep.S_direct = tr.final.S;
    rep.inner_crossings = int(tr.crossings.size());
    rep.max_energy_drift = std::max(rep.max_energy_drift, tr.max_energy_drift);
    rep.ode_steps += tr.steps;
    return tr.final.v;
  };
  cplx v = run(eps);
  rep.endpoint_raw = rep.endpoint;
  rep.mismatch_raw = rep.mismatch;
  rep.S_direct_raw = rep.S_direct;
  // z(t; eps) ~ y + v (t - t(eps)): the Jacobian is -v t'(eps).
  for (int k = 0; k < opt.shooting_steps && rep.mismatch > 1e-13 * s.y; ++k) {
    cplx J = -v * epsilon_to_time_derivative(p, s.x, s.y, eps, s.N);
    eps -= (rep.endpoint - s.y) / J;
    v = run(eps);
    ++rep.shooting_steps;
  }
  rep.epsilon = eps;
  return rep;
}

cplx multi_instanton_epsilon(const Potential& p, int m, cplx eps0) {
  if (m < 0) throw DomainError("instanton index m must be non-negative");
  double N0 = n_of_epsilon(p, eps0);
  if (m == 0) return eps0;
  double phase = std::arg(eps0);
  double r = solve_on_ray(p, phase, N0, [&](cplx e) { return (2 * m + 1) * n_of_epsilon(p, e); });
  return std::polar(r, phase);
}

}  // namespace rtb
