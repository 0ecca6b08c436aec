#pragma once

#include <optional>
#include <vector>

#include "rtb/contour.hpp"
#include "rtb/errors.hpp"
#include "rtb/trajectory.hpp"

namespace rtb {

struct SaddleIterate {
  cplx epsilon;
  cplx residual;  // t(eps) - t_target
  double damping = 1;
};

// Full ODE check of a contour-map saddle, with optional shooting refinement of eps.
struct ShootingReport {
  cplx endpoint_raw;          // z(t) at the contour-map eps
  double mismatch_raw = 0;    // |z(t) - y| at the contour-map eps
  cplx epsilon;               // eps after shooting
  cplx endpoint;              // z(t) after shooting
  double mismatch = 0;
  cplx S_direct;              // action integrated along the final ODE path
  cplx S_direct_raw;          // same, before shooting
  int shooting_steps = 0;
  int inner_crossings = 0;
  double max_energy_drift = 0;
  long ode_steps = 0;
};

struct SaddleSolution {
  cplx epsilon;
  int N = 0;
  double t = 0, x = 0, y = 0;
  bool kept = false;
  bool converged = false;
  cplx residual;
  cplx action;             // N I + S_line - eps t
  cplx conjugate_action;   // same for eps*
  std::vector<SaddleIterate> history;
  std::optional<ShootingReport> shooting;
};

// Long-double DP5 at 1e-15 with no escape ceiling: saddle paths pass close to poles.
IntegratorConfig shooting_config();

struct SaddleOptions {
  std::optional<cplx> seed;
  std::optional<int> N;       // default: rounded from the seed
  double rel_tol = 1e-8;      // |residual| < rel_tol * t_target
  int max_iter = 60;
  bool verify_ode = true;
  int shooting_steps = 0;     // raw endpoint already sits at the integrator noise floor
  IntegratorConfig ode = shooting_config();
};

// Thrown when Newton stalls; carries the best iterate.
struct SaddleNoConvergence : NoConvergence {
  SaddleNoConvergence(const std::string& what, SaddleSolution best)
      : NoConvergence(what), best(std::move(best)) {}
  SaddleSolution best;
};

cplx epsilon_to_time(const Potential& p, double x, double y, cplx eps, int N);
// d t / d eps at fixed N, by central differences.
cplx epsilon_to_time_derivative(const Potential& p, double x, double y, cplx eps, int N);

// Leading cycle-count law: N = A_S (-ln|eps|) / (2 pi (p+1) A_I Im eps^p) with A_S = 1/2.
// For even n, 2 pi (p+1) = n pi with p = n/2 - 1.
double n_of_epsilon(const Potential& p, cplx eps);
// Same law with the O(1) constant beside the logarithm: -A_S(ln|eps| + 1) - Im B_S.
double n_of_epsilon_corrected(const Potential& p, cplx eps, double A_S, cplx B_S);

// Default seed on the ray arg eps = pi/(2p) with 2 pi n_of_epsilon(eps) = t.
cplx default_seed(const Potential& p, double t);

cplx saddle_action(const Potential& p, double x, double y, cplx eps, int N, double t);

SaddleSolution solve_saddle(const Potential& p, double x, double y, double t,
                            const SaddleOptions& opt = {});
ShootingReport verify_by_shooting(const Potential& p, const SaddleSolution& s,
                                  const SaddleOptions& opt = {});

// eps_m on the ray of eps0 with (2m+1) n_of_epsilon(eps_m) = n_of_epsilon(eps0).
cplx multi_instanton_epsilon(const Potential& p, int m, cplx eps0);

}  // namespace rtb
