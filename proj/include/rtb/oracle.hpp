#pragma once

#include <string>
#include <vector>

#include "rtb/potential.hpp"

namespace rtb {

struct GridSpec {
  double x_min = -6, x_max = 6;
  double dx = 0.002;
  double dt = 0.005;
  double hbar_eff = 0.1;
};

struct OracleConfig {
  GridSpec grid;
  double t_end = 80;
  double cap_factor = 3;            // linear continuation of V beyond cap_factor * b
  double absorber_fraction = 0.2;   // outer share of each side carrying -iW
  double absorber_strength = 50;    // W0
  bool absorber = true;
  bool relax = true;                // imaginary-time relaxation in the confined well
  double relax_dtau = 0.02;
  int relax_steps = 1500;
  int record_every = 20;
  std::vector<double> probes{2.0, 2.5};  // probes[0] also bounds the region |x| < y
};

struct OracleSample {
  double t = 0;
  double P = 0;               // probability in [-y, y]
  double norm = 0;
  double mean_x = 0;
  double j_left = 0;          // current at -y
  std::vector<double> j;      // current at each probe
};

struct OracleRun {
  OracleConfig config;
  std::vector<double> x, V;   // grid and capped real potential
  std::vector<OracleSample> samples;
  double cfl_number = 0;      // dt max|V| / hbar over |x| <= probes[0] + 0.5
  bool cfl_warning = false;   // cfl_number > 0.5; recorded, never raised
};

struct DecayFit {
  double gamma = 0;              // flux route: mean of (j(y) - j(-y)) / P over the window
  double gamma_population = 0;   // slope of -ln P over the window
  double r_squared = 0;          // linearity of the accumulated flux integral
  double r_squared_population = 0;
  double t_start = 0, t_end = 0;
  std::string method = "flux";
};

std::vector<double> grid_points(const GridSpec& g);
void validate_grid(const GridSpec& g, const OracleConfig& c);

// V capped by linear continuation with matched value and slope beyond +-cap_factor b.
std::vector<double> capped_potential(const Potential& p, const std::vector<double>& x,
                                     double cap_factor);

// Normalized Gaussian of width sqrt(hbar) centred at 0.
std::vector<cplx> prepare_initial_state(const GridSpec& g);
// Imaginary-time Crank-Nicolson in the well, V clamped to V(x_p) beyond the peak.
std::vector<cplx> relax_initial_state(const Potential& p, const OracleConfig& c,
                                      std::vector<cplx> psi);

double norm(const GridSpec& g, const std::vector<cplx>& psi);
double mean_position(const GridSpec& g, const std::vector<cplx>& psi);
double energy_expectation(const Potential& p, const GridSpec& g, const std::vector<cplx>& psi);

// hbar Im(psi* dpsi/dx) at y, centred differences, linear interpolation between nodes.
double probability_current(const GridSpec& g, const std::vector<cplx>& psi, double y);

OracleRun evolve(const Potential& p, const OracleConfig& c, const std::vector<cplx>& psi0,
                 std::vector<cplx>* psi_final = nullptr);
OracleRun run_oracle(const Potential& p, const OracleConfig& c);

DecayFit fit_gamma(const OracleRun& run, std::size_t probe = 0);

struct RateSweep {
  std::vector<double> hbar;
  std::vector<DecayFit> fits;
  std::vector<double> probe_ratio;  // window-mean j(probes[1]) / j(probes[0])
  std::vector<bool> cfl_warning;
  double slope = 0, intercept = 0;  // ln Gamma = intercept + slope / hbar
  bool has_slope = false;
  double expected_slope = 0;        // -2 S_E across the whole barrier
  bool off_exponent = false;        // slope more than 10% from expected_slope
};
// One evolution per hbar, run on separate threads.
RateSweep rate_sweep(const Potential& p, const OracleConfig& base, const std::vector<double>& hbars);

}  // namespace rtb
