#include "rtb/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

namespace rtb {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Json to_json(cplx z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

Json to_json(const IntegratorConfig& c) {
  Json j{{"rel_tol", c.rel_tol}, {"abs_tol", c.abs_tol},   {"max_step", c.max_step},
         {"t_max", c.t_max},     {"escape_radius", c.escape_radius},
         {"drift_tolerance", c.drift_tolerance}};
  if (c.stop_at) j["stop_at"] = *c.stop_at;
  return j;
}

Json to_json(const Trajectory& tr, bool with_points) {
  Json j{{"potential", tr.potential.describe()},
         {"epsilon", to_json(tr.epsilon)},
         {"start", to_json(tr.start)},
         {"start_velocity", to_json(tr.start_velocity)},
         {"sign", tr.sign},
         {"config", to_json(tr.config)},
         {"N", tr.N},
         {"crossings", tr.crossings.size()},
         {"termination", tr.termination},
         {"final_time", tr.final.t},
         {"final_z", to_json(tr.final.z)},
         {"final_S", to_json(tr.final.S)},
         {"max_energy_drift", tr.max_energy_drift},
         {"steps", tr.steps},
         {"rejected", tr.rejected}};
  j["exit_time"] = tr.exit_time ? Json(*tr.exit_time) : Json(nullptr);
  j["endpoint_time"] = tr.endpoint_time ? Json(*tr.endpoint_time) : Json(nullptr);
  if (with_points) {
    Json pts = Json::array();
    for (const auto& q : tr.points) pts.push_back({q.t, q.z.real(), q.z.imag(), q.v.real(), q.v.imag()});
    j["points"] = pts;
  }
  return j;
}

Json to_json(const SaddleSolution& s) {
  Json hist = Json::array();
  for (const auto& h : s.history)
    hist.push_back({{"epsilon", to_json(h.epsilon)}, {"residual", to_json(h.residual)}, {"damping", h.damping}});
  Json j{{"epsilon", to_json(s.epsilon)},
         {"N", s.N},
         {"t", s.t},
         {"x", s.x},
         {"y", s.y},
         {"converged", s.converged},
         {"kept", s.kept},
         {"residual", to_json(s.residual)},
         {"action", to_json(s.action)},
         {"iS", to_json(cplx(0, 1) * s.action)},
         {"conjugate", {{"epsilon", to_json(std::conj(s.epsilon))},
                        {"action", to_json(s.conjugate_action)},
                        {"kept", (cplx(0, 1) * s.conjugate_action).real() < 0}}},
         {"iterates", hist}};
  if (s.shooting) {
    const auto& r = *s.shooting;
    j["ode_check"] = {{"endpoint_raw", to_json(r.endpoint_raw)},
                      {"mismatch_raw", r.mismatch_raw},
                      {"epsilon", to_json(r.epsilon)},
                      {"endpoint", to_json(r.endpoint)},
                      {"mismatch", r.mismatch},
                      {"S_direct", to_json(r.S_direct)},
                      {"shooting_steps", r.shooting_steps},
                      {"inner_crossings", r.inner_crossings},
                      {"max_energy_drift", r.max_energy_drift},
                      {"ode_steps", r.ode_steps}};
  }
  return j;
}

Json to_json(const ActionBreakdown& a) {
  Json j{{"epsilon", to_json(a.epsilon)},
         {"N", a.N},
         {"t", a.t},
         {"x", a.x},
         {"y", a.y},
         {"kept", a.kept},
         {"I_cycle", to_json(a.I_cycle)},
         {"I_zc", to_json(a.I_zc)},
         {"S_line", to_json(a.S_line)},
         {"eps_t", to_json(a.eps_t)},
         {"S_contour", to_json(a.S_contour)},
         {"S_shortcut", to_json(a.S_shortcut)},
         {"shortcut_rel_diff", a.shortcut_rel_diff},
         {"S_expansion", to_json(a.S_expansion)},
         {"S_E", a.S_E},
         {"S_free", a.S_free}};
  j["S_direct"] = a.S_direct ? to_json(*a.S_direct) : Json(nullptr);
  j["direct_rel_diff"] = a.direct_rel_diff ? Json(*a.direct_rel_diff) : Json(nullptr);
  Factorization f = factorize(a);
  j["factorization"] = {{"S_E", f.S_E}, {"S_free", f.S_free}};
  return j;
}

Json to_json(const SeriesCoefficients& s) {
  Json samples = Json::array();
  for (cplx e : s.samples) samples.push_back(to_json(e));
  return Json{{"S0", to_json(s.S0)},
              {"A_S", s.A_S},
              {"sigma_A_S", s.sigma_A_S},
              {"B_S", to_json(s.B_S)},
              {"C_S", to_json(s.C_S)},
              {"residual_S", s.residual_S},
              {"exponent", s.exponent},
              {"A_I", to_json(s.A_I)},
              {"residual_I", s.residual_I},
              {"alt_exponent", s.alt_exponent},
              {"A_I_alt", to_json(s.A_I_alt)},
              {"residual_I_alt", s.residual_I_alt},
              {"preferred_exponent", s.residual_I <= s.residual_I_alt ? s.exponent : s.alt_exponent},
              {"condition", s.condition},
              {"samples", samples}};
}

Json to_json(const DecayFit& f) {
  return Json{{"gamma", f.gamma},
              {"gamma_population", f.gamma_population},
              {"r_squared", f.r_squared},
              {"r_squared_population", f.r_squared_population},
              {"fit_window", {f.t_start, f.t_end}},
              {"method", f.method}};
}

Json to_json(const GridSpec& g) {
  return Json{{"x_min", g.x_min}, {"x_max", g.x_max}, {"dx", g.dx}, {"dt", g.dt}, {"hbar_eff", g.hbar_eff}};
}

Json to_json(const RateSweep& r) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.hbar.size(); ++i) {
    Json row{{"hbar_eff", r.hbar[i]}, {"fit", to_json(r.fits[i])}, {"cfl_warning", bool(r.cfl_warning[i])}};
    if (i < r.probe_ratio.size()) row["probe_ratio"] = r.probe_ratio[i];
    rows.push_back(row);
  }
  Json j{{"rows", rows}};
  if (r.has_slope)
    j["fit"] = {{"slope", r.slope},
                {"intercept", r.intercept},
                {"expected_slope", r.expected_slope},
                {"off_exponent", r.off_exponent}};
  else j["fit"] = nullptr;
  return j;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "t,re_z,im_z,re_v,im_v\n";
  for (const auto& q : tr.points)
    os << q.t << ',' << q.z.real() << ',' << q.z.imag() << ',' << q.v.real() << ',' << q.v.imag() << '\n';
}

void write_oracle_csv(std::ostream& os, const OracleRun& run) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "t,P";
  for (double y : run.config.probes) os << ",j_" << y;
  os << ",j_left\n";
  for (const auto& s : run.samples) {
    os << s.t << ',' << s.P;
    for (double v : s.j) os << ',' << v;
    os << ',' << s.j_left << '\n';
  }
}

ConfigMap parse_config(std::istream& is) {
  ConfigMap out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto c = line.find_first_of("#;");
    if (c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw DomainError("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) throw DomainError("config line " + std::to_string(lineno) + ": empty key");
    out[section.empty() ? key : section + "." + key] = val;
  }
  return out;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot open config file " + path);
  return parse_config(f);
}

}  // namespace rtb
