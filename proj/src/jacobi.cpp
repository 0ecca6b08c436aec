#include <cmath>

#include "rtb/errors.hpp"
#include "rtb/trajectory.hpp"

namespace rtb {

namespace {

// Descending Landen: sqrt(m1) = (1 - k')/(1 + k'), u = (1 + sqrt(m1)) v.
JacobiSnCnDn landen(cplx u, cplx m, int depth) {
  if (std::abs(m) < 1e-17) {
    cplx s = std::sin(u), c = std::cos(u), w = 0.25 * m * (u - s * c);
    return {s - w * c, c + w * s, 1.0 - 0.5 * m * s * s};
  }
  if (depth > 30) throw ModulusOutOfRange("Landen recursion did not reach a small modulus");
  cplx kp = std::sqrt(1.0 - m);
  cplx r = (1.0 - kp) / (1.0 + kp);
  cplx m1 = r * r;
  if (!(std::abs(m1) < std::abs(m))) throw ModulusOutOfRange("Landen transformation does not contract");
  JacobiSnCnDn in = landen(u / (1.0 + r), m1, depth + 1);
  cplx den = 1.0 + r * in.sn * in.sn;
  return {(1.0 + r) * in.sn / den, in.cn * in.dn / den, (1.0 - r * in.sn * in.sn) / den};
}

}  // namespace

JacobiSnCnDn jacobi_sncndn(cplx u, cplx m) { return landen(u, m, 0); }

JacobiState jacobi_reference(cplx q, double t) {
  cplx amp = std::sqrt(2.0 * q / (1.0 + q));
  cplx w = 1.0 / std::sqrt(1.0 + q);
  JacobiSnCnDn f = jacobi_sncndn(t * w, q);
  return {-amp * f.sn, -amp * w * f.cn * f.dn};
}

cplx jacobi_energy(cplx q, double t) {
  JacobiState s = jacobi_reference(q, t);
  return 0.5 * s.v * s.v + 0.5 * s.z * s.z - 0.25 * s.z * s.z * s.z * s.z;
}

}  // namespace rtb
