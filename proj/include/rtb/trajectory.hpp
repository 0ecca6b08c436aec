#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtb/potential.hpp"

namespace rtb {

struct IntegratorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = 0.1;
  double t_max = 100.0;
  double escape_radius = 0;     // 0 selects 10 b (or 1e6 without a barrier)
  double sample_interval = 0;   // 0 stores every accepted step
  bool store_points = true;
  std::optional<double> stop_at;  // end when Re z first crosses this value upward
  double drift_tolerance = 1e-9;  // relative to the largest energy scale met so far
  bool throw_on_escape = false;
};

struct TrajectoryPoint {
  double t = 0;
  cplx z, v;
  cplx S;  // running action, integral of v^2/2 - V
};

struct Event {
  double t = 0;
  cplx z;
};

struct Trajectory {
  Potential potential;
  cplx epsilon;
  cplx start, start_velocity;
  int sign = 1;
  IntegratorConfig config;
  std::vector<TrajectoryPoint> points;
  std::vector<Event> crossings;  // Im z sign changes inside |z| < 2 r_nl
  std::vector<Event> apsides;    // local maxima of |z| inside |z| < 2 r_nl
  int N = 0;
  std::optional<double> exit_time;
  std::optional<double> endpoint_time;
  std::string termination;  // "t_max", "endpoint" or "escaped"
  TrajectoryPoint final;
  double max_energy_drift = 0;
  long steps = 0, rejected = 0;

  // Dense output from the stored points (quintic Hermite in z and v).
  TrajectoryPoint sample(double t) const;
};

Trajectory integrate_eom(const Potential& p, cplx x, cplx eps, int sign, const IntegratorConfig& cfg);
Trajectory integrate_from_state(const Potential& p, cplx z0, cplx v0, const IntegratorConfig& cfg);

cplx initial_velocity(const Potential& p, cplx x, cplx eps, int sign);
cplx harmonic_reference(cplx x, cplx eps, int sign, double t);

struct DriftFit {
  cplx a;
  double window = 0;
  double residual_rms = 0;
  int cycles = 0;
};
DriftFit drift_coefficient(const Trajectory& tr);
cplx predicted_drift(const Potential& p, cplx eps, int sign);

struct ExitTail {
  std::vector<cplx> samples;  // (Re z, Im z) along the final approach
  bool monotone = false;      // |Im z| strictly decreasing as Re z grows
  double exponent = 0;        // fitted |Im z| ~ (Re z)^(-exponent)
  double re_min = 0, re_max = 0;
};
ExitTail exit_tail(const Trajectory& tr, double y);

// Positive-axis turning points of the inner motion, for period and growth measurements.
struct TurningPoints {
  std::vector<double> times, radii;
};
TurningPoints positive_turning_points(const Trajectory& tr);
// Crossings of the positive real axis with their radii.
TurningPoints positive_axis_crossings(const Trajectory& tr);

struct JacobiSnCnDn {
  cplx sn, cn, dn;
};
JacobiSnCnDn jacobi_sncndn(cplx u, cplx m);

struct JacobiState {
  cplx z, v;
};
// z(t) = -sqrt(2q/(1+q)) sn(t/sqrt(1+q) | q), the n=4 closed-form solution.
JacobiState jacobi_reference(cplx q, double t);
cplx jacobi_energy(cplx q, double t);

}  // namespace rtb
