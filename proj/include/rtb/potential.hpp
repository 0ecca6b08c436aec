#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace rtb {

using cplx = std::complex<double>;

// V(z) = sum_k c_k z^k with c0 = c1 = 0, c2 = 1/2. The family z^2/2 - z^n/n is the
// main case; any other real polynomial with that normalization is accepted.
class Potential {
 public:
  static Potential family(int n);
  static Potential harmonic();
  static Potential polynomial(std::vector<double> coeffs);

  template <class T>
  T value(T z) const {
    T acc = T(0);
    for (std::size_t k = c_.size(); k-- > 0;) acc = acc * z + T(c_[k]);
    return acc;
  }
  template <class T>
  T derivative(T z) const {
    T acc = T(0);
    for (std::size_t k = c_.size(); k-- > 1;) acc = acc * z + T(double(k) * c_[k]);
    return acc;
  }
  template <class T>
  T second_derivative(T z) const {
    T acc = T(0);
    for (std::size_t k = c_.size(); k-- > 2;) acc = acc * z + T(double(k * (k - 1)) * c_[k]);
    return acc;
  }

  const std::vector<double>& coefficients() const { return c_; }
  int degree() const { return int(c_.size()) - 1; }
  std::optional<int> family_exponent() const { return n_; }
  bool is_harmonic() const { return degree() == 2; }

  // Lowest term beyond the parabola: c_k z^k.
  int nonlinear_order() const;
  double nonlinear_coefficient() const;

  bool has_barrier() const { return b_.has_value(); }
  double peak() const;        // x_p, first positive zero of V'
  double peak_value() const;  // V(x_p)
  double exit_point() const;  // b, first positive zero of V beyond x_p

  std::string describe() const;

 private:
  explicit Potential(std::vector<double> c, std::optional<int> n);
  std::vector<double> c_;
  std::optional<int> n_;
  std::optional<double> xp_, b_;
};

struct BranchPointPair {
  cplx z_minus, z_plus, epsilon;
};

struct WkbQuantities {
  double S_E = 0, S_free = 0, b = 0, p_y = 0;
};

struct BounceIdentity {
  double r_min = 0, tau_end = 0;
  double S_E_bounce = 0;   // integral of rdot^2/2 + V along the bounce ODE
  double S_E_static = 0;   // integral of sqrt(2V) from r_min to b
  double tau_profile = 0;  // bounce_profile(r_min)
};

cplx eval_potential(const Potential& p, cplx z);
cplx eval_potential_derivative(const Potential& p, cplx z);

// All roots of 2 eps - 2 V(z), from the companion matrix.
std::vector<cplx> velocity_roots(const Potential& p, cplx eps);

// First-order series seed for z_+ (s=+1) or z_- (s=-1).
cplx branch_point_series(const Potential& p, cplx eps, int s);
BranchPointPair inner_branch_points(const Potential& p, cplx eps);

double barrier_exit_point(const Potential& p);
double nonlinear_scale(const Potential& p, cplx eps);
bool scales_separated(const Potential& p, cplx eps, double margin = 3.0);

// Real zero-energy momentum sqrt(-2V(y)).
double zero_energy_momentum(const Potential& p, double y);
double euclidean_action(const Potential& p, double x1, double x2);  // int sqrt(2V), x1<=x2<=b
double free_action(const Potential& p, double y1, double y2);       // int sqrt(-2V), b<=y1<=y2
WkbQuantities wkb_actions(const Potential& p, double x, double y);

double bounce_profile(const Potential& p, double r);
BounceIdentity bounce_identity(const Potential& p, double r_min);

}  // namespace rtb
