#include "rtb/verify.hpp"

#include <cmath>
#include <numbers>

namespace rtb {

namespace {

constexpr double kPi = std::numbers::pi;

struct Suite {
  std::string name;
  std::vector<CheckResult> out;

  // Passes when value <= tol.
  void below(const std::string& check, double value, double tol, std::string detail = "") {
    out.push_back({name, check, value <= tol, value, tol, std::move(detail)});
  }
  void holds(const std::string& check, bool ok, std::string detail = "") {
    out.push_back({name, check, ok, ok ? 1.0 : 0.0, 1.0, std::move(detail)});
  }
  template <class F>
  void guarded(const std::string& check, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      out.push_back({name, check, false, 0, 0, std::string("error: ") + e.what()});
    }
  }
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

void contour_suite(Suite& s) {
  Potential p4 = Potential::family(4);
  s.guarded("cycle_integral_closed_form", [&] {
    double worst = 0;
    for (double m : {1e-6, 1e-4})
      for (cplx u : {cplx(1), cplx(0, 1), std::polar(1.0, kPi / 4)}) {
        cplx e = m * u;
        worst = std::max(worst, rel(cycle_integral(p4, e), 2 * kPi * e * (1.0 + 3.0 * e / 8.0)));
      }
    s.below("cycle_integral_closed_form", worst, 1e-6, "n=4, |eps| <= 1e-4, three phases");
  });
  s.guarded("harmonic_cycle", [&] {
    cplx e(3e-4, 2e-4);
    s.below("harmonic_cycle", rel(cycle_integral(Potential::harmonic(), e), 2 * kPi * e), 1e-10);
  });
  s.guarded("contour_deformation", [&] {
    cplx e = std::polar(1e-4, 0.7);
    ContourOptions half;
    half.radius_scale = 0.5;
    s.below("contour_deformation", rel(cycle_integral(p4, e, half), cycle_integral(p4, e)), 1e-10);
  });
  s.guarded("time_is_derivative", [&] {
    cplx e = std::polar(1e-3, 1.1);
    double h = 1e-4 * std::abs(e);
    cplx d = (cycle_integral(p4, e + h) - cycle_integral(p4, e - h)) / (2 * h);
    s.below("time_is_derivative", rel(d, cycle_time_integral(p4, e)), 1e-7);
  });
  s.guarded("log_coefficient", [&] {
    SeriesCoefficients c = extract_log_coefficient(p4, 0, 2, ray_samples(std::polar(1e-4, kPi / 4), 8, 0.5));
    s.below("log_coefficient_A_S", std::abs(c.A_S - 0.5), 0.02, "x=0");
    s.below("correction_coefficient_A_I", std::abs(c.A_I - 0.375) / 0.375, 0.01, "closed form 3/8");
  });
}

void trajectory_suite(Suite& s) {
  Potential p4 = Potential::family(4);
  s.guarded("jacobi_cross_check", [&] {
    cplx q(-0.06, 0.06172);
    IntegratorConfig c;
    c.t_max = 50;
    c.sample_interval = 0.05;
    Trajectory tr = integrate_from_state(p4, 0, jacobi_reference(q, 0).v, c);
    double worst = 0;
    for (const auto& pt : tr.points) worst = std::max(worst, std::abs(pt.z - jacobi_reference(q, pt.t).z));
    s.below("jacobi_cross_check", worst, 1e-7, "q=-0.06+0.06172i, t in [0,50]");
  });
  s.guarded("energy_drift", [&] {
    cplx e = std::polar(1e-3, kPi / 3);
    IntegratorConfig c;
    c.t_max = 200;
    c.store_points = false;
    Trajectory tr = integrate_eom(p4, 0, e, 1, c);
    s.below("energy_drift", tr.max_energy_drift, 1e-9);
  });
  s.guarded("cycle_duration", [&] {
    IntegratorConfig c;
    c.t_max = 60;
    c.store_points = false;
    double e = 1e-3;
    Trajectory tr = integrate_eom(p4, 0, e, 1, c);
    TurningPoints tp = positive_turning_points(tr);
    double worst = 0;
    for (std::size_t i = 1; i < tp.times.size(); ++i)
      worst = std::max(worst, std::abs(tp.times[i] - tp.times[i - 1] - (2 * kPi + 1.5 * kPi * e)));
    s.below("cycle_duration", worst, 1e-4, "real eps = 1e-3");
    double growth = 0;
    for (std::size_t i = 1; i < tp.radii.size(); ++i) growth = std::max(growth, std::abs(tp.radii[i] - tp.radii[i - 1]));
    s.below("closed_orbit_growth", growth, 1e-8, "real eps = 1e-3");
  });
  s.guarded("drift_law", [&] {
    cplx e = std::polar(1e-3, kPi / 3);
    IntegratorConfig c;
    c.t_max = 450 * kPi;
    Trajectory tr = integrate_eom(p4, 0, e, 1, c);
    DriftFit f = drift_coefficient(tr);
    s.below("drift_law", rel(f.a, predicted_drift(p4, e, 1)), 0.1, "n=4, eps = 1e-3 e^{i pi/3}");
  });
}

void action_suite(Suite& s) {
  Potential p4 = Potential::family(4);
  s.guarded("saddle_actions", [&] {
    SaddleOptions o;
    SaddleSolution sol = solve_saddle(p4, 0, 2, 2 * kPi * 200, o);
    ActionBreakdown a = action_decomposed(p4, sol);
    s.below("direct_vs_contour", a.direct_rel_diff.value_or(1.0), 1e-6, "N=200 saddle");
    s.below("shortcut_vs_contour", a.shortcut_rel_diff, 1e-5);
    double re = (cplx(0, 1) * sol.action).real(), rc = (cplx(0, 1) * sol.conjugate_action).real();
    s.below("conjugation_antisymmetry", std::abs(re + rc), 1e-9);
    s.holds("exactly_one_kept", (re < 0) != (rc < 0) && sol.kept == (re < 0));
    Factorization f = factorize(a);
    s.below("factorization_near_limit", std::hypot(f.S_E - 2.0 / 3, f.S_free - 2.0 / 3), 0.02,
            "raw (-Re iS, Im iS) at |eps| ~ 5e-3");
  });
  s.guarded("x_shift_compensation", [&] {
    double lo = 1e300, hi = -1e300;
    for (double x = 0; x <= 0.05 + 1e-12; x += 0.01) {
      double v = matched_exponent(p4, x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s.below("x_shift_compensation", hi - lo, 1e-4, "x in [0, 0.05]");
  });
}

void oracle_suite(Suite& s) {
  Potential p4 = Potential::family(4);
  s.guarded("initial_state", [&] {
    GridSpec g;
    std::vector<cplx> psi = prepare_initial_state(g);
    s.below("initial_norm", std::abs(norm(g, psi) - 1), 1e-10);
    s.below("initial_mean", std::abs(mean_position(g, psi)), 1e-12);
  });
  s.guarded("unitarity", [&] {
    OracleConfig c;
    c.grid = {-4, 4, 0.01, 0.01, 0.1};
    c.absorber = false;
    c.t_end = 100;
    c.record_every = 10000;
    c.probes = {1.0};
    std::vector<cplx> psi0 = prepare_initial_state(c.grid), psi;
    evolve(Potential::harmonic(), c, psi0, &psi);
    s.below("unitarity", std::abs(norm(c.grid, psi) - 1), 1e-8, "harmonic, 1e4 steps, no absorber");
  });
  s.guarded("decay_rate", [&] {
    OracleConfig c;
    c.grid.hbar_eff = 0.12;
    OracleRun run = run_oracle(p4, c);
    DecayFit f = fit_gamma(run);
    s.below("flux_vs_population", std::abs(f.gamma_population - f.gamma) / f.gamma, 0.1, "hbar=0.12");
    double a = 0, b = 0;
    for (const auto& q : run.samples)
      if (q.t >= f.t_start) a += q.j[1], b += q.j[0];
    s.below("two_probe_current", std::abs(a / b - 1), 0.05, "y = 2, 2.5");
  });
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"contour", "trajectory", "action", "oracle", "all"};
  return names;
}

std::vector<CheckResult> run_suite(const std::string& name) {
  if (name == "all") {
    std::vector<CheckResult> all;
    for (const auto& n : suite_names())
      if (n != "all") {
        auto part = run_suite(n);
        all.insert(all.end(), part.begin(), part.end());
      }
    return all;
  }
  Suite s{name, {}};
  if (name == "contour") contour_suite(s);
  else if (name == "trajectory") trajectory_suite(s);
  else if (name == "action") action_suite(s);
  else if (name == "oracle") oracle_suite(s);
  else throw DomainError("unknown verify suite '" + name + "'");
  return s.out;
}

Json report(const std::vector<CheckResult>& checks) {
  Json rows = Json::array();
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.pass;
    rows.push_back({{"suite", c.suite}, {"check", c.name}, {"pass", c.pass},
                    {"value", c.value}, {"tolerance", c.tolerance}, {"detail", c.detail}});
  }
  return Json{{"pass", ok}, {"checks", rows}};
}

}  // namespace rtb
