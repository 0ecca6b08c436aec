#pragma once

#include <vector>

#include "rtb/potential.hpp"

namespace rtb {

struct BranchTrackedPath {
  std::vector<cplx> points;
  std::vector<cplx> velocity;
  cplx epsilon;
};

struct ContourOptions {
  double isolation_factor = 10.0;  // other roots must lie this many cut half-widths away
  double radius_scale = 1.0;       // multiplies the geometric-mean contour radius
  double rel_tol = 1e-11;
  int min_nodes = 64;
  int max_nodes = 1 << 20;
};

struct CycleGeometry {
  cplx center;
  double half_width = 0;   // |z+ - z-| / 2
  double radius = 0;       // circle radius actually used
  double isolation = 0;    // distance to the nearest other root / half_width
  int orientation = 1;     // +1 counter-clockwise, -1 clockwise
  cplx anchor_point, anchor_velocity;
};

struct CycleResult {
  cplx value;
  int nodes = 0;
  double closure_error = 0;  // |v after one loop - v at start| / |v at start|
  CycleGeometry geometry;
};

struct CorrectionLaw {
  double exponent = 0;  // I/(2 pi eps) - 1 ~ A_I eps^exponent
  double A_I = 0;
  bool closed_form = false;
};

struct SeriesCoefficients {
  cplx S0, B_S, C_S;
  double A_S = 0, sigma_A_S = 0;
  double residual_S = 0;      // rms of the S fit
  double exponent = 0;        // preferred correction exponent
  cplx A_I;                   // two-term fit at the preferred exponent
  double alt_exponent = 0;
  cplx A_I_alt;
  double residual_I = 0, residual_I_alt = 0;  // relative rms of one-term fits
  std::vector<cplx> samples;
  std::vector<cplx> local_A_I;  // (I/(2 pi eps) - 1) / eps^(n/2-1) per sample
  double condition = 0;
};

// Continuation of sqrt(2 eps - 2 V) along points, starting from the root nearest anchor.
BranchTrackedPath track_branch(const Potential& p, cplx eps, const std::vector<cplx>& points,
                               cplx anchor);

CycleGeometry cycle_geometry(const Potential& p, cplx eps, const ContourOptions& opt = {});
CycleResult cycle_integral_detail(const Potential& p, cplx eps, bool time_integrand,
                                  const ContourOptions& opt = {});
cplx cycle_integral(const Potential& p, cplx eps, const ContourOptions& opt = {});
cplx cycle_time_integral(const Potential& p, cplx eps, const ContourOptions& opt = {});

// Branch used on the real axis: principal root of 2 eps - 2V(r).
cplx line_velocity(const Potential& p, cplx eps, double r);
cplx real_line_S(const Potential& p, double x, double y, cplx eps);
cplx real_line_time(const Potential& p, double x, double y, cplx eps);

// One inner winding from the crossing radius r to the next crossing r_next.
cplx single_cycle_duration(const Potential& p, cplx eps, double r, double r_next);
double next_crossing_radius(const Potential& p, cplx eps, double r);

double closed_form_A_I(int n);
CorrectionLaw correction_law(const Potential& p);
double reference_scale(const Potential& p, cplx eps);

// count samples eps_max, eps_max ratio, eps_max ratio^2, ... (ratio < 1).
std::vector<cplx> ray_samples(cplx eps_max, int count, double ratio);
SeriesCoefficients extract_log_coefficient(const Potential& p, double x, double y,
                                           const std::vector<cplx>& samples);

}  // namespace rtb
