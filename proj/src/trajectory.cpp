#include "rtb/trajectory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rtb/errors.hpp"
#include "rtb/ode.hpp"

namespace rtb {

namespace {

using LD = long double;
using CL = std::complex<long double>;
using Stepper = ode::Dopri5<LD, CL, 3>;

cplx to_d(CL z) { return {double(z.real()), double(z.imag())}; }

void validate(const IntegratorConfig& c) {
  if (!(c.rel_tol > 0) || !(c.abs_tol > 0) || !(c.max_step > 0) || !(c.t_max > 0))
    throw DomainError("integrator tolerances, max_step and t_max must be positive");
}

Trajectory run(const Potential& p, cplx z0, cplx v0, cplx eps, int sign, const IntegratorConfig& cfg) {
  validate(cfg);
  Trajectory tr{p, eps, z0, v0, sign, cfg, {}, {}, {}, 0, {}, {}, "t_max", {}, 0, 0, 0};
  const double r_inner = eps == cplx(0) ? 0.0 : 2 * nonlinear_scale(p, eps);
  const double escape =
      cfg.escape_radius > 0 ? cfg.escape_radius : (p.has_barrier() ? 10 * p.exit_point() : 1e6);
  const double b = p.has_barrier() ? p.exit_point() : std::numeric_limits<double>::infinity();
  const LD drift_budget = cfg.drift_tolerance;
  const CL epsl(eps.real(), eps.imag());

  auto rhs = [&p](LD, const Stepper::State& y) {
    CL z = y[0], v = y[1];
    return Stepper::State{v, -p.derivative(z), v * v / LD(2) - p.value(z)};
  };
  ode::StepControl ctl{cfg.rel_tol, cfg.abs_tol, cfg.max_step, 1e-14L};
  Stepper st(rhs, ctl);

  auto push = [&](LD t, CL z, CL v, CL S) {
    if (cfg.store_points) tr.points.push_back({double(t), to_d(z), to_d(v), to_d(S)});
  };
  Stepper::State y0{CL(z0.real(), z0.imag()), CL(v0.real(), v0.imag()), CL(0)};
  push(0, y0[0], y0[1], y0[2]);
  double next_sample = cfg.sample_interval;
  int retries = 0;
  LD peak_scale = 0;
  bool stopped = false;
  Stepper::State y_end{};
  LD t_end = 0;

  auto on_step = [&](LD t0, const Stepper::State& y, const Stepper::State& f, LD t1,
                     const Stepper::State& y1, const Stepper::State& f1) {
    CL kin = y1[1] * y1[1] / LD(2), pot = p.value(y1[0]);
    LD drift = std::abs(kin + pot - epsl);
    // Relative to the largest energy scale met so far: near a movable pole both terms are huge.
    LD scale = std::max(peak_scale, std::abs(kin) + std::abs(pot));
    if (drift > drift_budget * std::max(1.0L, scale)) {
      if (++retries <= 6) return ode::StepVerdict::Retry;
      throw EnergyDriftExceeded("energy drift exceeds budget after step-size retries");
    }
    retries = 0;
    peak_scale = scale;
    tr.max_energy_drift = std::max(tr.max_energy_drift, double(drift));
    LD h = t1 - t0;
    CL j0 = -p.second_derivative(y[0]) * y[1], j1 = -p.second_derivative(y1[0]) * y1[1];
    auto zs = [&](LD s) { return ode::hermite5(s, h, y[0], f[0], f[1], y1[0], f1[0], f1[1]); };
    auto vs = [&](LD s) { return ode::hermite5(s, h, y[1], f[1], j0, y1[1], f1[1], j1); };
    auto root = [&](auto g) {
      LD lo = 0, hi = 1, glo = g(lo);
      for (int it = 0; it < 60 && (hi - lo) * h > 1e-13L; ++it) {
        LD mid = (lo + hi) / 2;
        LD gm = g(mid);
        if ((gm > 0) == (glo > 0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      return (lo + hi) / 2;
    };

    if ((y[0].imag() > 0) != (y1[0].imag() > 0)) {
      LD s = root([&](LD s) { return zs(s).imag(); });
      CL z = zs(s);
      if (std::abs(z) < r_inner) tr.crossings.push_back({double(t0 + s * h), to_d(z)});
    }
    LD g0 = std::real(std::conj(y[0]) * y[1]), g1 = std::real(std::conj(y1[0]) * y1[1]);
    if (g0 > 0 && g1 <= 0) {
      LD s = root([&](LD s) { return std::real(std::conj(zs(s)) * vs(s)); });
      CL z = zs(s);
      if (std::abs(z) < r_inner) tr.apsides.push_back({double(t0 + s * h), to_d(z)});
    }
    if (!tr.exit_time && y[0].real() < b && y1[0].real() >= b) {
      LD s = root([&](LD s) { return zs(s).real() - b; });
      tr.exit_time = double(t0 + s * h);
    }

    LD t_stop = t1;
    const Stepper::State* last = &y1;
    Stepper::State ys, fs;
    if (cfg.stop_at && y[0].real() < *cfg.stop_at && y1[0].real() >= *cfg.stop_at) {
      LD s = root([&](LD s) { return zs(s).real() - *cfg.stop_at; });
      st.trial(t0, y, f, s * h, ys, fs);
      t_stop = t0 + s * h;
      last = &ys;
      tr.endpoint_time = double(t_stop);
      tr.termination = "endpoint";
      stopped = true;
    }

    if (cfg.sample_interval > 0) {
      while (next_sample <= double(t_stop) + 1e-12) {
        LD s = (LD(next_sample) - t0) / h;
        CL z = zs(s), v = vs(s);
        LD s2 = s * s, s3 = s2 * s;
        CL S = (2 * s3 - 3 * s2 + 1) * y[2] + h * (s3 - 2 * s2 + s) * f[2] +
               (-2 * s3 + 3 * s2) * y1[2] + h * (s3 - s2) * f1[2];
        push(next_sample, z, v, S);
        next_sample += cfg.sample_interval;
      }
    } else {
      push(t_stop, (*last)[0], (*last)[1], (*last)[2]);
    }

    if (!stopped && std::abs((*last)[0]) > escape) {
      tr.termination = "escaped";
      stopped = true;
      if (cfg.throw_on_escape) throw Escaped("trajectory left the escape radius");
    }
    if (stopped) {
      y_end = *last;
      t_end = t_stop;
      return ode::StepVerdict::Stop;
    }
    return ode::StepVerdict::Accept;
  };

  LD t_reached = st.run(0, y0, cfg.t_max, on_step);
  if (!stopped) {
    y_end = st.final_state();
    t_end = t_reached;
  }
  tr.final = {double(t_end), to_d(y_end[0]), to_d(y_end[1]), to_d(y_end[2])};
  if (cfg.store_points && cfg.sample_interval > 0 && tr.points.back().t < tr.final.t - 1e-12)
    tr.points.push_back(tr.final);
  tr.N = int(tr.crossings.size() / 2);
  tr.steps = st.steps();
  tr.rejected = st.rejected();
  return tr;
}

}  // namespace

cplx initial_velocity(const Potential& p, cplx x, cplx eps, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  return double(sign) * std::sqrt(2.0 * eps - 2.0 * p.value(x));
}

Trajectory integrate_eom(const Potential& p, cplx x, cplx eps, int sign, const IntegratorConfig& cfg) {
  if (p.has_barrier() && std::abs(eps) >= p.peak_value())
    throw DomainError("|eps| must lie below the barrier height");
  return run(p, x, initial_velocity(p, x, eps, sign), eps, sign, cfg);
}

Trajectory integrate_from_state(const Potential& p, cplx z0, cplx v0, const IntegratorConfig& cfg) {
  return run(p, z0, v0, 0.5 * v0 * v0 + p.value(z0), 0, cfg);
}

TrajectoryPoint Trajectory::sample(double t) const {
  if (points.empty()) throw DomainError("trajectory has no stored points");
  if (t <= points.front().t) return points.front();
  if (t >= points.back().t) return points.back();
  auto it = std::upper_bound(points.begin(), points.end(), t,
                             [](double x, const TrajectoryPoint& q) { return x < q.t; });
  const TrajectoryPoint& b = *it;
  const TrajectoryPoint& a = *(it - 1);
  double h = b.t - a.t, s = (t - a.t) / h;
  cplx aa = -potential.derivative(a.z), ab = -potential.derivative(b.z);
  cplx ja = -potential.second_derivative(a.z) * a.v, jb = -potential.second_derivative(b.z) * b.v;
  cplx la = 0.5 * a.v * a.v - potential.value(a.z), lb = 0.5 * b.v * b.v - potential.value(b.z);
  return {t, ode::hermite5(s, h, a.z, a.v, aa, b.z, b.v, ab), ode::hermite5(s, h, a.v, aa, ja, b.v, ab, jb),
          ode::hermite3(s, h, a.S, la, b.S, lb)};
}

cplx harmonic_reference(cplx x, cplx eps, int sign, double t) {
  return x * std::cos(t) + double(sign) * std::sqrt(2.0 * eps - x * x) * std::sin(t);
}

cplx predicted_drift(const Potential& p, cplx eps, int sign) {
  auto n = p.family_exponent();
  if (!n || *n != 4) throw DomainError("closed-form drift amplitude is available for n=4");
  cplx r = std::sqrt(eps);
  return -double(sign) * 3.0 / (2.0 * std::sqrt(2.0)) * r * r * r;
}

DriftFit drift_coefficient(const Trajectory& tr) {
  if (tr.N < 5) throw InsufficientCycles("drift fit needs at least 5 inner cycles");
  const double pi = std::numbers::pi;
  double T = std::max(10 * pi, std::min(0.2 / std::abs(tr.epsilon), 400 * pi));
  T = std::min({T, tr.crossings.back().t, tr.final.t});
  if (T < 10 * pi - 1e-9) throw InsufficientCycles("inner region left before the fit window");
  int m = int(T * 64 / (2 * pi));
  const int k = 17;
  Eigen::MatrixXd A(m, k);
  Eigen::VectorXcd rhs(m);
  double scale = 1.0 / T;
  for (int i = 0; i < m; ++i) {
    double t = T * (i + 0.5) / m;
    double c = std::cos(t), s = std::sin(t), ts = t * scale;
    int col = 0;
    A(i, col++) = t * c;
    A(i, col++) = t * s;
    A(i, col++) = ts * t * s;
    A(i, col++) = ts * t * c;
    A(i, col++) = 1;
    for (int q = 1; q <= 5; ++q) {
      A(i, col++) = std::cos(q * t);
      A(i, col++) = std::sin(q * t);
    }
    A(i, col++) = t * std::cos(3 * t);
    A(i, col++) = t * std::sin(3 * t);
    rhs(i) = tr.sample(t).z - harmonic_reference(tr.start, tr.epsilon, tr.sign == 0 ? 1 : tr.sign, t);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::VectorXd re = qr.solve(rhs.real()), im = qr.solve(rhs.imag());
  Eigen::VectorXcd coef = re.cast<cplx>() + cplx(0, 1) * im.cast<cplx>();
  DriftFit out;
  out.a = coef(0);
  out.window = T;
  out.cycles = int(T / (2 * pi));
  out.residual_rms = std::sqrt((A.cast<cplx>() * coef - rhs).squaredNorm() / m);
  return out;
}

ExitTail exit_tail(const Trajectory& tr, double y) {
  if (!tr.exit_time) throw NoExit("trajectory never crossed the exit point");
  double b = tr.potential.exit_point(), lo = 1.5 * b;
  if (y <= lo) throw DomainError("exit tail window needs y > 1.5 b");
  const auto& pts = tr.points;
  auto inside = [&](const TrajectoryPoint& q) { return q.t >= *tr.exit_time && q.z.real() >= lo && q.z.real() <= y; };
  // First passage through the window after the exit; later loops are not part of the tail.
  long count = long(pts.size()), first = 0;
  while (first < count && !inside(pts[first])) ++first;
  if (first == count) throw NoExit("trajectory never entered the exit-tail window");
  long last = first;
  while (last + 1 < count && inside(pts[last + 1]) && pts[last + 1].z.real() > pts[last].z.real()) ++last;
  // Resample the segment uniformly in time through the dense output.
  ExitTail out;
  double t0 = pts[first].t, t1 = pts[last].t;
  int m = 200;
  for (int i = 0; i <= m; ++i) out.samples.push_back(tr.sample(t0 + (t1 - t0) * i / m).z);
  if (out.samples.size() < 5 || t1 <= t0) throw NoExit("exit-tail window too short");
  out.monotone = true;
  for (std::size_t i = 1; i < out.samples.size(); ++i)
    if (!(std::abs(out.samples[i].imag()) < std::abs(out.samples[i - 1].imag()))) out.monotone = false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (cplx z : out.samples) {
    double lx = std::log(z.real()), ly = std::log(std::abs(z.imag()));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = double(out.samples.size());
  out.exponent = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.re_min = out.samples.front().real();
  out.re_max = out.samples.back().real();
  return out;
}

TurningPoints positive_turning_points(const Trajectory& tr) {
  TurningPoints out;
  for (const Event& e : tr.apsides)
    if (e.z.real() > 0) {
      out.times.push_back(e.t);
      out.radii.push_back(std::abs(e.z));
    }
  return out;
}

TurningPoints positive_axis_crossings(const Trajectory& tr) {
  TurningPoints out;
  for (const Event& e : tr.crossings)
    if (e.z.real() > 0) {
      out.times.push_back(e.t);
      out.radii.push_back(e.z.real());
    }
  return out;
}

}  // namespace rtb
