// rtb: command-line front end for the tunneling-saddle library.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "rtb/action.hpp"
#include "rtb/io.hpp"
#include "rtb/verify.hpp"

using namespace rtb;

namespace {

struct Args {
  int n = 4;
  double x = 0, y = 2, t = 0;
  double eps_re = 0, eps_im = 0, q_re = 0, q_im = 0;
  double tol = 1e-12;
  double probe = 2.0;
  std::vector<double> hbar;
  std::string out, config, suite;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Keys shared by the config file and the command line; flags win over the file.
struct Binding {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<Json()> echo;
};

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::vector<Binding> bindings(Args& a) {
  auto num = [](const std::string& k, double& ref) {
    return Binding{k, [&ref, k](const std::string& v) { ref = to_double(k, v); }, [&ref] { return Json(ref); }};
  };
  return {
      {"n", [&a](const std::string& v) { a.n = int(to_double("n", v)); }, [&a] { return Json(a.n); }},
      num("x", a.x),
      num("y", a.y),
      num("t", a.t),
      num("eps-re", a.eps_re),
      num("eps-im", a.eps_im),
      num("q-re", a.q_re),
      num("q-im", a.q_im),
      num("tol", a.tol),
      num("probe", a.probe),
      {"hbar",
       [&a](const std::string& v) {
         a.hbar.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) a.hbar.push_back(to_double("hbar", item));
       },
       [&a] { return Json(a.hbar); }},
      {"out", [&a](const std::string& v) { a.out = v; }, [&a] { return Json(a.out); }},
  };
}

Potential potential_of(int n) { return n == 2 ? Potential::harmonic() : Potential::family(n); }

void emit(const Args& a, const Json& j) {
  if (a.out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(a.out + ".json");
  if (!f) throw DomainError("cannot write " + a.out + ".json");
  f << j.dump(2) << '\n';
}

void emit_csv(const Args& a, const std::string& suffix, const std::function<void(std::ostream&)>& w) {
  if (a.out.empty()) return;
  std::ofstream f(a.out + suffix);
  if (!f) throw DomainError("cannot write " + a.out + suffix);
  w(f);
}

// Points where Im(2 eps - 2V) changes sign along grid edges, split by the sign of the real
// part: Re zdot = 0 where 2 eps - 2V < 0, Im zdot = 0 where it is > 0.
void write_loci_csv(std::ostream& os, const Potential& p, cplx eps, double half) {
  os << "locus,re_z,im_z\n";
  os.precision(12);
  const int M = 241;
  auto w = [&](double re, double im) { return 2.0 * eps - 2.0 * p.value(cplx(re, im)); };
  auto coord = [&](int k) { return -half + 2 * half * k / (M - 1); };
  auto edge = [&](double r0, double i0, double r1, double i1) {
    cplx w0 = w(r0, i0), w1 = w(r1, i1);
    if ((w0.imag() > 0) == (w1.imag() > 0)) return;
    double s = w0.imag() / (w0.imag() - w1.imag());
    double re = r0 + s * (r1 - r0), im = i0 + s * (i1 - i0);
    os << (w(re, im).real() < 0 ? "re_zdot_zero" : "im_zdot_zero") << ',' << re << ',' << im << '\n';
  };
  for (int i = 0; i < M; ++i)
    for (int k = 0; k + 1 < M; ++k) {
      edge(coord(k), coord(i), coord(k + 1), coord(i));
      edge(coord(i), coord(k), coord(i), coord(k + 1));
    }
}

Json header(const std::string& cmd, const std::vector<Binding>& b, const std::vector<std::string>& used) {
  Json cfg = Json::object();
  for (const auto& k : used)
    for (const auto& x : b)
      if (x.key == k) cfg[k] = x.echo();
  return Json{{"version", kVersion}, {"command", cmd}, {"config", cfg}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time tunneling saddles: trajectories, actions, cycle laws and a decay-rate oracle"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Args cli;

  std::map<std::string, CLI::Option*> given;
  auto common = [&](CLI::App* s, const std::vector<std::string>& keys) {
    for (const auto& k : keys) {
      CLI::Option* o = nullptr;
      if (k == "n") o = s->add_option("--n", cli.n, "potential exponent (2 = harmonic)");
      else if (k == "x") o = s->add_option("--x", cli.x, "start point");
      else if (k == "y") o = s->add_option("--y", cli.y, "end point");
      else if (k == "t") o = s->add_option("--t", cli.t, "total time");
      else if (k == "eps-re") o = s->add_option("--eps-re", cli.eps_re, "Re eps");
      else if (k == "eps-im") o = s->add_option("--eps-im", cli.eps_im, "Im eps");
      else if (k == "q-re") o = s->add_option("--q-re", cli.q_re, "Re q (n=4 closed-form family)");
      else if (k == "q-im") o = s->add_option("--q-im", cli.q_im, "Im q");
      else if (k == "tol") o = s->add_option("--tol", cli.tol, "integrator relative tolerance");
      else if (k == "probe") o = s->add_option("--probe", cli.probe, "current probe y (> b)");
      else if (k == "hbar") o = s->add_option("--hbar", cli.hbar, "hbar_eff (repeatable)");
      given[s->get_name() + "." + k] = o;
    }
    s->add_option("--out", cli.out, "output path stem (writes <stem>.json, CSVs alongside)");
    s->add_option("--config", cli.config, "key=value config file; [section] = subcommand");
  };

  auto* trace = app.add_subcommand("trace", "integrate a trajectory and write it with the zdot loci");
  common(trace, {"n", "x", "t", "eps-re", "eps-im", "q-re", "q-im", "tol", "y"});
  auto* saddle = app.add_subcommand("saddle", "solve for the complex energy of a tunneling saddle");
  common(saddle, {"n", "x", "y", "t", "eps-re", "eps-im", "tol"});
  auto* action = app.add_subcommand("action", "saddle action by direct, contour and expansion routes");
  common(action, {"n", "x", "y", "t", "eps-re", "eps-im", "tol"});
  auto* series = app.add_subcommand("series", "fit the small-eps coefficients along a ray");
  common(series, {"n", "x", "y", "eps-re", "eps-im"});
  auto* rate = app.add_subcommand("rate", "Schroedinger-evolution decay rates over hbar_eff");
  common(rate, {"n", "hbar", "probe"});
  auto* verify = app.add_subcommand("verify", "run invariant suites");
  verify->add_option("suite", cli.suite, "contour | trajectory | action | oracle | all")->required();
  verify->add_option("--out", cli.out, "output path stem");
  auto* bounce = app.add_subcommand("bounce", "Euclidean bounce identity and WKB actions");
  common(bounce, {"n", "x", "y"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    // Merge: defaults < config file < flags.
    Args a;
    if (name == "saddle" || name == "action") a.tol = shooting_config().rel_tol;
    auto bind = bindings(a);
    auto cli_bind = bindings(cli);
    std::vector<std::string> used;
    for (const auto& [k, o] : given)
      if (k.rfind(name + ".", 0) == 0) used.push_back(k.substr(name.size() + 1));
    if (!cli.config.empty()) {
      ConfigMap file = load_config(cli.config);
      for (const auto& [key, val] : file) {
        std::string k = key;
        auto dot = k.find('.');
        if (dot != std::string::npos) {
          if (k.substr(0, dot) != name) continue;
          k = k.substr(dot + 1);
        }
        auto it = std::find_if(bind.begin(), bind.end(), [&](const Binding& b) { return b.key == k; });
        if (it == bind.end()) throw UsageError("unknown config key '" + key + "'");
        it->set(val);
      }
    }
    for (std::size_t i = 0; i < bind.size(); ++i) {
      const std::string& k = bind[i].key;
      auto g = given.find(name + "." + k);
      bool flagged = k == "out" ? !cli.out.empty() : (g != given.end() && g->second->count() > 0);
      if (!flagged) continue;
      if (k == "hbar") a.hbar = cli.hbar;
      else if (k == "out") a.out = cli.out;
      else {
        std::ostringstream os;
        os.precision(17);
        os << cli_bind[i].echo().get<double>();
        bind[i].set(os.str());
      }
    }
    a.suite = cli.suite;
    auto has = [&](const std::string& k) {
      auto g = given.find(name + "." + k);
      return g != given.end() && g->second->count() > 0;
    };

    if (name == "verify") {
      auto checks = run_suite(a.suite);
      Json j = report(checks);
      j = Json{{"version", kVersion}, {"command", "verify"}, {"config", {{"suite", a.suite}}},
               {"pass", j["pass"]}, {"checks", j["checks"]}};
      emit(a, j);
      return j["pass"].get<bool>() ? 0 : 1;
    }

    Potential p = potential_of(a.n);
    Json j = header(name, bind, used);
    j["potential"] = p.describe();

    if (name == "trace") {
      if (!(a.t > 0)) throw UsageError("trace needs --t > 0 (integration time)");
      IntegratorConfig c;
      c.t_max = a.t;
      c.rel_tol = a.tol;
      c.abs_tol = a.tol * 1e-2;
      if (has("y")) c.stop_at = a.y;
      const bool by_q = has("q-re") || has("q-im");
      if (by_q && a.n != 4) throw DomainError("the q parameterization exists only for n=4");
      const cplx q(a.q_re, a.q_im);
      Trajectory tr = by_q ? integrate_from_state(p, 0, jacobi_reference(q, 0).v, c)
                           : integrate_eom(p, a.x, cplx(a.eps_re, a.eps_im), 1, c);
      if (by_q) {
        j["q"] = to_json(q);
        j["epsilon_candidates"] = {{"q/(1+q)^2", to_json(q / ((1.0 + q) * (1.0 + q)))},
                                   {"q/(1+q^2)", to_json(q / (1.0 + q * q))}};
      }
      j["trajectory"] = to_json(tr);
      emit(a, j);
      emit_csv(a, ".csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); });
      double half = p.has_barrier() ? 1.5 * p.exit_point() : 2.0;
      emit_csv(a, "_loci.csv", [&](std::ostream& os) { write_loci_csv(os, p, tr.epsilon, half); });
      return 0;
    }

    if (name == "saddle" || name == "action") {
      if (!has("t") && a.t == 0) throw UsageError(name + " needs --t");
      SaddleOptions o;
      if (has("eps-re") || has("eps-im")) o.seed = cplx(a.eps_re, a.eps_im);
      o.ode.rel_tol = a.tol;
      o.ode.abs_tol = a.tol * 1e-2;
      SaddleSolution s = solve_saddle(p, a.x, a.y, a.t, o);
      j["saddle"] = to_json(s);
      if (name == "action") j["action"] = to_json(action_decomposed(p, s));
      emit(a, j);
      return 0;
    }

    if (name == "series") {
      cplx e(a.eps_re, a.eps_im);
      if (e == cplx(0)) throw UsageError("series needs the largest sample energy via --eps-re/--eps-im");
      j["series"] = to_json(extract_log_coefficient(p, a.x, a.y, ray_samples(e, 8, 0.5)));
      emit(a, j);
      return 0;
    }

    if (name == "rate") {
      if (a.hbar.empty()) throw UsageError("rate needs at least one --hbar");
      if (!p.has_barrier() || !(a.probe > p.exit_point()))
        throw DomainError("probe must lie beyond the barrier exit b");
      OracleConfig c;
      c.probes = {a.probe, a.probe + 0.5};
      RateSweep r = rate_sweep(p, c, a.hbar);
      j["grid"] = to_json(c.grid);
      j["rate"] = to_json(r);
      j["note"] = "hbar_eff enters as i hbar dpsi/dt = (-hbar^2/2 d2/dx2 + V) psi; artifact scaling choice";
      emit(a, j);
      emit_csv(a, ".csv", [&](std::ostream& os) {
        os.precision(17);
        os << "hbar_eff,gamma,gamma_population\n";
        for (std::size_t i = 0; i < r.hbar.size(); ++i)
          os << r.hbar[i] << ',' << r.fits[i].gamma << ',' << r.fits[i].gamma_population << '\n';
      });
      return 0;
    }

    if (name == "bounce") {
      double r_min = a.x > 0 ? a.x : 1e-3;
      BounceIdentity b = bounce_identity(p, r_min);
      WkbQuantities w = wkb_actions(p, 0, std::max(a.y, p.exit_point()));
      j["bounce"] = {{"r_min", b.r_min},         {"tau_end", b.tau_end},
                     {"tau_profile", b.tau_profile}, {"S_E_bounce", b.S_E_bounce},
                     {"S_E_static", b.S_E_static}};
      j["wkb"] = {{"S_E", w.S_E}, {"S_free", w.S_free}, {"b", w.b}, {"p_y", w.p_y}};
      emit(a, j);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "DomainError: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << '\n';
    return 1;
  }
  return 2;
}
