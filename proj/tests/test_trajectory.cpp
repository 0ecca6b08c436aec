#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rtb/contour.hpp"
#include "rtb/errors.hpp"
#include "rtb/trajectory.hpp"

using namespace rtb;
using std::numbers::pi;

namespace {

const cplx kQ(-0.06, 0.06172);

IntegratorConfig quiet(double t_max) {
  IntegratorConfig c;
  c.t_max = t_max;
  c.store_points = false;
  return c;
}

}  // namespace

TEST_CASE("harmonic reference") {
  CHECK(std::abs(harmonic_reference(0, 1e-4, 1, 0)) == 0.0);
  CHECK(std::abs(harmonic_reference(0, 1e-4, 1, pi / 2) - std::sqrt(2e-4)) < 1e-15);
  CHECK(std::abs(harmonic_reference(0.01, cplx(1e-4, 1e-4), 1, pi) + 0.01) < 1e-15);
}

TEST_CASE("harmonic orbit is a closed ellipse") {
  auto h = Potential::harmonic();
  IntegratorConfig c;
  c.t_max = 20 * pi;
  c.sample_interval = 0.1;
  // x != 0 and complex eps give a proper ellipse, so Im z changes sign twice per period.
  double x = 0.01;
  cplx e(1e-3, 5e-4);
  auto tr = integrate_eom(h, x, e, 1, c);
  CHECK(tr.termination == "t_max");
  CHECK_FALSE(tr.exit_time.has_value());
  double worst = 0;
  for (const auto& pt : tr.points) worst = std::max(worst, std::abs(pt.z - harmonic_reference(x, e, 1, pt.t)));
  CHECK(worst < 1e-10);
  auto rk = oracle::rk4_harmonic(x, initial_velocity(h, x, e, 1), 20 * pi, 1e-3);
  CHECK(std::abs(tr.final.z - rk.z) < 1e-10);
  CHECK(tr.N == 10);
  CHECK_THROWS_AS(exit_tail(tr, 2), NoExit);
  auto tp = positive_axis_crossings(tr);
  REQUIRE(tp.times.size() >= 9);
  for (std::size_t i = 1; i < tp.times.size(); ++i) {
    CHECK(tp.times[i] - tp.times[i - 1] == doctest::Approx(2 * pi).epsilon(1e-9));
    CHECK(tp.radii[i] == doctest::Approx(tp.radii[0]).epsilon(1e-9));
  }
}

TEST_CASE("initial velocity branch") {
  auto p4 = Potential::family(4);
  cplx e(2e-4, 3e-4);
  cplx v = initial_velocity(p4, 0, e, 1);
  CHECK(std::abs(v * v - 2.0 * e) < 1e-18);
  CHECK(v.real() > 0);
  CHECK(std::abs(initial_velocity(p4, 0, e, -1) + v) == 0.0);
}

TEST_CASE("agreement with a fixed-step RK4 oracle") {
  for (int n : {3, 4, 5}) {
    auto p = Potential::family(n);
    cplx e = std::polar(2e-3, 1.0);
    IntegratorConfig c = quiet(30);
    auto tr = integrate_eom(p, 0.01, e, 1, c);
    auto rk = oracle::rk4(n, 0.01, initial_velocity(p, 0.01, e, 1), 30, 2e-3);
    CHECK(std::abs(tr.final.z - rk.z) < 1e-9);
    CHECK(std::abs(tr.final.v - rk.v) < 1e-9);
  }
}

TEST_CASE("Jacobi cross-check and the measured energy of q") {
  auto p4 = Potential::family(4);
  IntegratorConfig c;
  c.t_max = 50;
  c.sample_interval = 0.05;
  auto ref0 = jacobi_reference(kQ, 0);
  CHECK(std::abs(ref0.z) == 0.0);
  auto tr = integrate_from_state(p4, 0, ref0.v, c);
  double worst = 0;
  for (const auto& pt : tr.points) worst = std::max(worst, std::abs(pt.z - jacobi_reference(kQ, pt.t).z));
  CHECK(worst < 1e-7);
  cplx E0 = jacobi_energy(kQ, 0);
  for (double t : {7.0, 23.0, 49.0}) CHECK(std::abs(jacobi_energy(kQ, t) - E0) < 1e-10);
  // Direct substitution into the equation of motion gives q/(1+q)^2.
  CHECK(std::abs(E0 - kQ / ((1.0 + kQ) * (1.0 + kQ))) < 1e-10);
  CHECK(std::abs(E0 - kQ / (1.0 + kQ * kQ)) > 1e-3);
}

TEST_CASE("out-spiral and exit at the Jacobi energy") {
  auto p4 = Potential::family(4);
  IntegratorConfig c;
  c.t_max = 200;
  auto tr = integrate_eom(p4, 0, jacobi_energy(kQ, 0), 1, c);
  REQUIRE(tr.exit_time.has_value());
  CHECK(tr.N >= 3);
  auto tail = exit_tail(tr, 2.5);
  CHECK(tail.monotone);
  CHECK(tail.exponent > 0);
  for (std::size_t i = 1; i < tr.crossings.size(); ++i) CHECK(tr.crossings[i].t > tr.crossings[i - 1].t);
}

TEST_CASE("real energy closes the orbit") {
  auto p4 = Potential::family(4);
  auto tr = integrate_eom(p4, 0, 1e-3, 1, quiet(60));
  CHECK_FALSE(tr.exit_time.has_value());
  auto tp = positive_turning_points(tr);
  REQUIRE(tp.radii.size() >= 8);
  for (std::size_t i = 1; i < tp.radii.size(); ++i) {
    CHECK(std::abs(tp.radii[i] - tp.radii[i - 1]) < 1e-8);
    CHECK(std::abs(tp.times[i] - tp.times[i - 1] - oracle::quartic_period(1e-3)) < 1e-8);
  }
  CHECK(std::abs(oracle::quartic_period(1e-3) - (2 * pi + 1.5 * pi * 1e-3)) < 1e-4);
}

TEST_CASE("energy drift budget and tolerance scaling") {
  auto p4 = Potential::family(4);
  cplx e = std::polar(1e-3, pi / 3);
  auto tr = integrate_eom(p4, 0, e, 1, quiet(200));
  CHECK(tr.max_energy_drift < 1e-9 * std::max(1.0, std::abs(e)));
  // The drift tracks the tolerance linearly: ten times tighter gives at least 8x less.
  IntegratorConfig loose = quiet(200), tight = quiet(200);
  loose.rel_tol = 1e-9;
  loose.abs_tol = 1e-11;
  tight.rel_tol = 1e-10;
  tight.abs_tol = 1e-12;
  double d1 = integrate_eom(p4, 0, e, 1, loose).max_energy_drift;
  double d2 = integrate_eom(p4, 0, e, 1, tight).max_energy_drift;
  CHECK(d2 * 8 < d1);
}

TEST_CASE("time reversal") {
  auto p4 = Potential::family(4);
  cplx e = std::polar(1e-3, 1.2);
  auto fw = integrate_eom(p4, 0.02, e, 1, quiet(40));
  auto bw = integrate_from_state(p4, fw.final.z, -fw.final.v, quiet(40));
  CHECK(std::abs(bw.final.z - 0.02) < 1e-7);
  CHECK(std::abs(bw.final.v + initial_velocity(p4, 0.02, e, 1)) < 1e-7);
}

TEST_CASE("complex conjugation symmetry") {
  auto p4 = Potential::family(4);
  cplx e = std::polar(1e-3, 1.2);
  IntegratorConfig c;
  c.t_max = 100;
  auto a = integrate_eom(p4, 0.01, e, 1, c);
  auto b = integrate_eom(p4, 0.01, std::conj(e), 1, c);
  double worst = 0;
  for (double t = 0; t <= 100; t += 0.37) worst = std::max(worst, std::abs(a.sample(t).z - std::conj(b.sample(t).z)));
  CHECK(worst < 1e-9);
}

TEST_CASE("inner cycle duration and radial growth against the contour map") {
  auto p4 = Potential::family(4);
  for (double m : {1e-3, 5e-3}) {
    cplx e = std::polar(m, pi / 3);
    auto tr = integrate_eom(p4, 0, e, 1, quiet(80));
    auto ax = positive_axis_crossings(tr);
    REQUIRE(ax.times.size() >= 6);
    for (std::size_t i = 1; i < 6; ++i) {
      cplx pred = single_cycle_duration(p4, e, ax.radii[i - 1], ax.radii[i]);
      CHECK(std::abs(ax.times[i] - ax.times[i - 1] - pred.real()) < 1e-4);
      CHECK(std::abs(pred.imag()) < 1e-8);
      double rn = next_crossing_radius(p4, e, ax.radii[i - 1]);
      double grow = ax.radii[i] - ax.radii[i - 1], grow_pred = rn - ax.radii[i - 1];
      CHECK(std::abs(grow - grow_pred) < 0.05 * std::abs(grow_pred));
    }
    // Leading-order cycle time 2 pi + (3 pi/2) Re eps.
    cplx T = cycle_time_integral(p4, e);
    CHECK(std::abs(T.real() - (2 * pi + 1.5 * pi * e.real())) < (m < 2e-3 ? 1e-4 : 5e-4));
  }
}

TEST_CASE("drift amplitude") {
  auto p4 = Potential::family(4);
  cplx e = std::polar(1e-3, pi / 3);
  IntegratorConfig c;
  c.t_max = 220;
  auto tr = integrate_eom(p4, 0, e, 1, c);
  auto fit = drift_coefficient(tr);
  cplx pred = predicted_drift(p4, e, 1);
  CHECK(std::abs(std::abs(pred) - 3 / (2 * std::sqrt(2.0)) * std::pow(1e-3, 1.5)) < 1e-15);
  CHECK(std::abs(fit.a - pred) < 0.1 * std::abs(pred));

  IntegratorConfig hc;
  hc.t_max = 40 * pi;
  auto harm = integrate_eom(Potential::harmonic(), 0, e, 1, hc);
  CHECK(std::abs(drift_coefficient(harm).a) < 1e-10);

  IntegratorConfig shortc;
  shortc.t_max = 10;
  CHECK_THROWS_AS(drift_coefficient(integrate_eom(p4, 0, e, 1, shortc)), InsufficientCycles);
}

TEST_CASE("odd-n drift exponent") {
  auto p5 = Potential::family(5);
  std::vector<double> lx, ly;
  for (double m : {1e-4, 3e-4, 1e-3, 3e-3}) {
    cplx e = std::polar(m, pi / 3);
    IntegratorConfig c;
    c.t_max = std::max(10 * pi, std::min(0.2 / m, 400 * pi)) + 20;
    auto fit = drift_coefficient(integrate_eom(p5, 0, e, 1, c));
    lx.push_back(std::log(m));
    ly.push_back(std::log(std::abs(fit.a)));
  }
  CHECK(std::abs(oracle::slope(lx, ly) - 3.5) < 0.3);
}

TEST_CASE("escape ceiling") {
  auto p4 = Potential::family(4);
  IntegratorConfig c;
  c.t_max = 200;
  c.escape_radius = 3;
  c.throw_on_escape = true;
  CHECK_THROWS_AS(integrate_eom(p4, 0, jacobi_energy(kQ, 0), 1, c), Escaped);
  c.throw_on_escape = false;
  CHECK(integrate_eom(p4, 0, jacobi_energy(kQ, 0), 1, c).termination == "escaped");
}

TEST_CASE("endpoint event") {
  auto p4 = Potential::family(4);
  IntegratorConfig c;
  c.t_max = 200;
  c.stop_at = 2.0;
  auto tr = integrate_eom(p4, 0, jacobi_energy(kQ, 0), 1, c);
  REQUIRE(tr.endpoint_time.has_value());
  CHECK(tr.termination == "endpoint");
  CHECK(std::abs(tr.final.z.real() - 2.0) < 1e-9);
}
