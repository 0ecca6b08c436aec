#pragma once

#include <optional>
#include <vector>

#include "rtb/saddle.hpp"

namespace rtb {

struct ActionBreakdown {
  cplx epsilon;
  int N = 0;
  double t = 0, x = 0, y = 0;
  bool kept = false;
  std::optional<cplx> S_direct;  // from the ODE path, when the saddle was verified
  cplx I_cycle;                  // one cycle
  cplx I_zc;                     // N cycles
  cplx S_line;
  cplx eps_t;
  cplx S_contour;                // I_zc + S_line - eps t
  cplx S_shortcut;               // (1 - eps d/deps)(I_zc + S_line) at fixed N
  cplx S_expansion;
  double shortcut_rel_diff = 0;
  std::optional<double> direct_rel_diff;
  double S_E = 0, S_free = 0;    // closed-form WKB actions for (x, y)
};

// Quadrature of v^2/2 - V over the stored dense output; the running integral carried by
// the integrator is used when no points were stored.
cplx action_direct(const Trajectory& tr);

ActionBreakdown action_decomposed(const Potential& p, const SaddleSolution& s);

// S0 + (1/2 - 1/n) eps^(n/2) ln|eps| / Im eps^(n/2-1)
cplx action_expansion(const Potential& p, double x, double y, cplx eps);
cplx expansion_correction(const Potential& p, cplx eps);

struct Factorization {
  double S_E = 0, S_free = 0;          // -Re iS, Im iS
  double S_E_wkb = 0, S_free_wkb = 0;  // closed forms
};
Factorization factorize(const ActionBreakdown& a);

// Fit S(eps_k) = S0 + K c(eps_k) + L c(eps_k)/ln|eps_k| over a sweep of saddles, with
// c = expansion_correction; L is dropped for fewer than 4 saddles.
struct FactorizationLimit {
  double S_E = 0, S_free = 0;  // from S0
  cplx S0, K, L;               // K = 1 when the leading correction is exact
  double rms_residual = 0;
  std::vector<double> raw_deviation;  // |S_contour - S0| per sample
};
FactorizationLimit extrapolate_factorization(const Potential& p,
                                             const std::vector<ActionBreakdown>& sweep);

// x^2/2 + S_E(x): the exponent of the would-be false-vacuum wave function at x times
// the tunneling suppression from x; flat to first order in x.
double matched_exponent(const Potential& p, double x);

}  // namespace rtb
