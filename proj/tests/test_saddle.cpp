#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rtb/errors.hpp"
#include "rtb/saddle.hpp"

using namespace rtb;
using std::numbers::pi;

namespace {

SaddleOptions contour_only() {
  SaddleOptions o;
  o.verify_ode = false;
  return o;
}

// Quartic leading law on the imaginary ray eps = i r: N = -ln r / (3 pi r).
double quartic_N(double r) { return -std::log(r) / (3 * pi * r); }

// Root of (2m+1) N(r_m) = N(r0) by bisection in ln r on the branch r_m > r0.
double bisect_ray(int m, double r0) {
  double target = quartic_N(r0) / (2 * m + 1);
  double lo = std::log(r0), hi = std::log(0.2);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (quartic_N(std::exp(mid)) > target ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("harmonic time map") {
  auto h = Potential::harmonic();
  double e = 1e-3;
  double y = 0.5 * std::sqrt(2 * e);
  for (int N : {1, 3, 10}) {
    cplx t = epsilon_to_time(h, 0, y, e, N);
    CHECK(std::abs(t.imag()) < 1e-12);
    CHECK(t.real() == doctest::Approx(2 * pi * N + pi / 6).epsilon(1e-12));
  }
  CHECK_THROWS_AS(epsilon_to_time(h, 0, y, e, 0), DomainError);
}

TEST_CASE("quartic time map") {
  auto p4 = Potential::family(4);
  // Nearly real energy: the barrier segment is classically forbidden, so t picks up an
  // imaginary part. Exactly real eps puts turning points on the segment.
  CHECK(std::abs(epsilon_to_time(p4, 0, 2, cplx(1e-3, 1e-10), 50).imag()) > 0.1);
  cplx e(-3e-4, 1e-3);
  cplx d = epsilon_to_time_derivative(p4, 0, 2, e, 300);
  double h = 1e-6;
  cplx fd = (epsilon_to_time(p4, 0, 2, e + h, 300) - epsilon_to_time(p4, 0, 2, e - h, 300)) / (2 * h);
  CHECK(std::abs(d - fd) < 1e-4 * std::abs(d));
}

TEST_CASE("cycle-count law") {
  auto p4 = Potential::family(4);
  CHECK(n_of_epsilon(p4, cplx(0, 1e-3)) == doctest::Approx(1 / (3 * pi) * -std::log(1e-3) / 1e-3).epsilon(1e-12));
  CHECK(std::abs(n_of_epsilon(p4, cplx(0, 1e-3)) - 733) < 1);
  double ratio = n_of_epsilon(p4, cplx(0, 1e-4)) / n_of_epsilon(p4, cplx(0, 1e-3));
  CHECK(ratio == doctest::Approx(10 * std::log(1e-4) / std::log(1e-3)).epsilon(1e-12));
  CHECK_THROWS_AS(n_of_epsilon(p4, 1e-3), PhaseConstraintViolated);
  cplx e(2e-4, 1e-3), B(0.3, -1.2);
  double corrected = n_of_epsilon_corrected(p4, e, 0.5, B);
  double manual = (-0.5 * (std::log(std::abs(e)) + 1) - B.imag()) / (4 * pi * 0.375 * e.imag());
  CHECK(corrected == doctest::Approx(manual).epsilon(1e-12));
  // n = 6 corrections start at eps^2, so the law sees Im eps^2.
  auto p6 = Potential::family(6);
  cplx e6 = std::polar(1e-3, pi / 4);
  CHECK(n_of_epsilon(p6, e6) ==
        doctest::Approx(0.5 * -std::log(1e-3) / (6 * pi * closed_form_A_I(6) * (e6 * e6).imag())).epsilon(1e-12));
}

TEST_CASE("default seed inverts the leading law") {
  auto p4 = Potential::family(4);
  for (double t : {2 * pi * 100, 2 * pi * 733, 2 * pi * 5000}) {
    cplx s = default_seed(p4, t);
    CHECK(std::arg(s) == doctest::Approx(pi / 2));
    CHECK(2 * pi * n_of_epsilon(p4, s) == doctest::Approx(t).epsilon(1e-10));
  }
  cplx s6 = default_seed(Potential::family(6), 2 * pi * 300);
  CHECK(std::arg(s6) == doctest::Approx(pi / 4));
}

TEST_CASE("contour-map saddle against the secant oracle") {
  auto p4 = Potential::family(4);
  double t = 2 * pi * 200;
  auto sol = solve_saddle(p4, 0, 2, t, contour_only());
  CHECK(sol.converged);
  CHECK(sol.kept);
  CHECK(sol.epsilon.imag() > 0);
  CHECK(std::abs(sol.residual) < 1e-8 * t);
  CHECK(std::abs(epsilon_to_time(p4, 0, 2, sol.epsilon, sol.N).imag()) < 1e-8);
  cplx ref = oracle::saddle_epsilon(4, 0, 2, t, sol.N, default_seed(p4, t));
  CHECK(std::abs(sol.epsilon - ref) < 1e-6 * std::abs(ref));
  CHECK(std::abs(sol.action - saddle_action(p4, 0, 2, sol.epsilon, sol.N, t)) < 1e-14);

  double re = (cplx(0, 1) * sol.action).real(), rc = (cplx(0, 1) * sol.conjugate_action).real();
  CHECK(re < 0);
  CHECK(rc > 0);
  CHECK(std::abs(re + rc) < 1e-9);
}

TEST_CASE("other potentials and start points") {
  for (int n : {3, 5, 6}) {
    auto p = Potential::family(n);
    // The cycle count grows like 1/|eps|^p, so each n needs its own time for |eps| ~ 2e-3.
    double p_exp = correction_law(p).exponent;
    double y = 1.4 * p.exit_point(), t = 2 * pi * std::round(n_of_epsilon(p, std::polar(2e-3, pi / (2 * p_exp))));
    // With N up to ~1e7 the time map is flat in eps, so the default residual budget leaves eps loose.
    SaddleOptions o = contour_only();
    o.rel_tol = 1e-13;
    auto sol = solve_saddle(p, 0.02, y, t, o);
    CHECK(sol.converged);
    CHECK(sol.kept);
    cplx ref = oracle::saddle_epsilon(n, 0.02, y, t, sol.N, sol.epsilon * cplx(1.02, 0.01));
    CHECK(std::abs(sol.epsilon - ref) < 1e-6 * std::abs(ref));
    double re = (cplx(0, 1) * sol.action).real(), rc = (cplx(0, 1) * sol.conjugate_action).real();
    CHECK((re < 0) != (rc < 0));
  }
}

TEST_CASE("ODE verification of a saddle") {
  auto p4 = Potential::family(4);
  SaddleOptions o;
  auto sol = solve_saddle(p4, 0, 2, 2 * pi * 200, o);
  REQUIRE(sol.shooting.has_value());
  const auto& r = *sol.shooting;
  CHECK(r.mismatch_raw < 1e-4 * 2);
  // The path grazes movable poles, where the drift budget is relative to |v^2/2| + |V|.
  CHECK(r.max_energy_drift < 1e-7);
  CHECK(r.inner_crossings > 0);
  CHECK(std::abs(r.S_direct - sol.action) < 1e-6 * std::abs(sol.action));
}

TEST_CASE("saddle size follows the corrected cycle-count law") {
  auto p4 = Potential::family(4);
  for (double k : {200.0, 500.0, 1000.0, 2000.0}) {
    double t = 2 * pi * k;
    auto sol = solve_saddle(p4, 0, 2, t, contour_only());
    auto c = extract_log_coefficient(p4, 0, 2, ray_samples(sol.epsilon, 8, 0.5));
    double N = n_of_epsilon_corrected(p4, sol.epsilon, 0.5, c.B_S);
    CHECK(std::abs(2 * pi * N - t) < 0.1 * t);
    CHECK(std::abs(N - sol.N) < 0.1 * sol.N);
  }
}

TEST_CASE("input validation") {
  auto p4 = Potential::family(4);
  CHECK_THROWS_AS(solve_saddle(p4, 0, 2, 5.0, contour_only()), DomainError);
  CHECK_THROWS_AS(solve_saddle(p4, 0, 1.2, 2 * pi * 200, contour_only()), DomainError);
  CHECK_THROWS_AS(solve_saddle(p4, 1.5, 2, 2 * pi * 200, contour_only()), DomainError);
  CHECK_THROWS_AS(solve_saddle(Potential::harmonic(), 0, 2, 2 * pi * 200, contour_only()), NoConvergence);
}

TEST_CASE("multi-instanton energies") {
  auto p4 = Potential::family(4);
  cplx e0(0, 1e-3);
  CHECK(std::abs(multi_instanton_epsilon(p4, 0, e0) - e0) < 1e-18);
  cplx e1 = multi_instanton_epsilon(p4, 1, e0), e2 = multi_instanton_epsilon(p4, 2, e0);
  double r1 = std::abs(e1) / 1e-3, r2 = std::abs(e2) / 1e-3;
  CHECK(r1 > 2.4);
  CHECK(r1 < 3.6);
  CHECK(std::arg(e1) == doctest::Approx(pi / 2));
  CHECK(r1 == doctest::Approx(bisect_ray(1, 1e-3) / 1e-3).epsilon(1e-8));
  CHECK(r2 == doctest::Approx(bisect_ray(2, 1e-3) / 1e-3).epsilon(1e-8));
  CHECK(r2 > r1);
  CHECK_THROWS_AS(multi_instanton_epsilon(p4, 1, 1e-3), PhaseConstraintViolated);
}
