#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>

namespace rtb::ode {

struct StepControl {
  long double rel_tol = 1e-12L;
  long double abs_tol = 1e-14L;
  long double h_max = 0.25L;
  long double h_min = 1e-14L;
};

enum class StepVerdict { Accept, Retry, Stop };

// Dormand-Prince 5(4) with FSAL and a PI step-size controller. The state is a fixed
// array of real or complex numbers of precision Real.
template <class Real, class Scalar, std::size_t K>
class Dopri5 {
 public:
  using State = std::array<Scalar, K>;

  template <class Rhs>
  Dopri5(Rhs rhs, StepControl ctl) : ctl_(ctl) {
    rhs_ = [rhs](Real t, const State& y) { return rhs(t, y); };
  }

  // Takes a single trial step of size h from (t, y) with derivative f. Returns the
  // scaled error norm; on output y1/f1 hold the 5th-order solution and its derivative.
  Real trial(Real t, const State& y, const State& f, Real h, State& y1, State& f1) const {
    static const Real a21 = Real(1) / 5;
    static const Real a31 = Real(3) / 40, a32 = Real(9) / 40;
    static const Real a41 = Real(44) / 45, a42 = Real(-56) / 15, a43 = Real(32) / 9;
    static const Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187,
                      a53 = Real(64448) / 6561, a54 = Real(-212) / 729;
    static const Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33, a63 = Real(46732) / 5247,
                      a64 = Real(49) / 176, a65 = Real(-5103) / 18656;
    static const Real b1 = Real(35) / 384, b3 = Real(500) / 1113, b4 = Real(125) / 192,
                      b5 = Real(-2187) / 6784, b6 = Real(11) / 84;
    static const Real e1 = Real(71) / 57600, e3 = Real(-71) / 16695, e4 = Real(71) / 1920,
                      e5 = Real(-17253) / 339200, e6 = Real(22) / 525, e7 = Real(-1) / 40;
    State tmp, k2, k3, k4, k5, k6;
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * a21 * f[i];
    k2 = rhs_(t + h / 5, tmp);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * (a31 * f[i] + a32 * k2[i]);
    k3 = rhs_(t + h * Real(3) / 10, tmp);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs_(t + h * Real(4) / 5, tmp);
    for (std::size_t i = 0; i < K; ++i)
      tmp[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs_(t + h * Real(8) / 9, tmp);
    for (std::size_t i = 0; i < K; ++i)
      tmp[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs_(t + h, tmp);
    for (std::size_t i = 0; i < K; ++i)
      y1[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f1 = rhs_(t + h, y1);
    Real acc = 0;
    for (std::size_t i = 0; i < K; ++i) {
      Scalar err = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * f1[i]);
      Real scale = Real(ctl_.abs_tol) + Real(ctl_.rel_tol) * std::max(std::abs(y[i]), std::abs(y1[i]));
      Real q = std::abs(err) / scale;
      acc += q * q;
    }
    return std::sqrt(acc / Real(K));
  }

  // Adaptive integration from t0 to t_end. on_step(t0, y0, f0, t1, y1, f1) decides whether
  // the accepted step stands, is retried with half the step, or ends the run.
  template <class OnStep>
  Real run(Real t, State y, Real t_end, OnStep&& on_step) {
    State f = rhs_(t, y), y1, f1;
    Real h = std::min(Real(ctl_.h_max), Real(0.01) * std::pow(Real(ctl_.rel_tol), Real(0.2)) * 10);
    Real err_prev = 1e-4;
    bool last_rejected = false;
    steps_ = rejected_ = 0;
    while (t < t_end) {
      h = std::min(h, t_end - t);
      if (h < Real(ctl_.h_min)) h = std::min(Real(ctl_.h_min), t_end - t);
      Real err = trial(t, y, f, h, y1, f1);
      if (!(err <= 1) && h > Real(ctl_.h_min)) {
        ++rejected_;
        Real fac = std::isfinite(double(err)) ? std::max(Real(0.2), Real(0.9) * std::pow(err, -Real(0.2))) : Real(0.2);
        h *= fac;
        last_rejected = true;
        continue;
      }
      StepVerdict verdict = on_step(t, y, f, t + h, y1, f1);
      if (verdict == StepVerdict::Retry && h > 2 * Real(ctl_.h_min)) {
        ++rejected_;
        h *= Real(0.5);
        last_rejected = true;
        continue;
      }
      ++steps_;
      t += h;
      y = y1;
      f = f1;
      if (verdict == StepVerdict::Stop) break;
      Real e = std::max(err, Real(1e-10));
      Real fac = Real(0.9) * std::pow(e, -Real(0.17)) * std::pow(err_prev, Real(0.04));
      fac = std::clamp(fac, Real(0.2), last_rejected ? Real(1) : Real(5));
      err_prev = std::max(err, Real(1e-4));
      h = std::min(h * fac, Real(ctl_.h_max));
      last_rejected = false;
    }
    final_state_ = y;
    return t;
  }

  const State& final_state() const { return final_state_; }
  long steps() const { return steps_; }
  long rejected() const { return rejected_; }

 private:
  StepControl ctl_;
  std::function<State(Real, const State&)> rhs_;
  State final_state_{};
  long steps_ = 0, rejected_ = 0;
};

// Quintic Hermite interpolation of a second-order system from (x, x', x'') at both ends.
template <class Real, class Scalar>
Scalar hermite5(Real s, Real h, Scalar x0, Scalar d0, Scalar a0, Scalar x1, Scalar d1, Scalar a1) {
  Real s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  Real h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
  Real h10 = s - 6 * s3 + 8 * s4 - 3 * s5;
  Real h20 = Real(0.5) * (s2 - 3 * s3 + 3 * s4 - s5);
  Real h01 = 10 * s3 - 15 * s4 + 6 * s5;
  Real h11 = -4 * s3 + 7 * s4 - 3 * s5;
  Real h21 = Real(0.5) * (s3 - 2 * s4 + s5);
  return h00 * x0 + h * h10 * d0 + h * h * h20 * a0 + h01 * x1 + h * h11 * d1 + h * h * h21 * a1;
}

template <class Real, class Scalar>
Scalar hermite3(Real s, Real h, Scalar x0, Scalar d0, Scalar x1, Scalar d1) {
  Real s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * x0 + h * (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * x1 +
         h * (s3 - s2) * d1;
}

}  // namespace rtb::ode
