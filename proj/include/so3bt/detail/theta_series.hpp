#pragma once

// Scalar-generic theta series used by both the double-precision public API and
// the extended-precision kernel checks. Works for any Real with ADL-visible
// exp/cos/sin/sqrt/log/floor (double, long double, boost::multiprecision types).

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <cstdint>

namespace so3bt::detail {

template <typename Real>
struct FrameValue {
  Real re;
  Real im;
};

// Terms kept on each side of the dominant one so that the Gaussian tail is
// below tol: M = ceil(1 + sqrt(ln(1/tol) / (pi N b))).
inline int theta_terms(int n_dim, double tau_im, double tol) {
  const double pi = boost::math::constants::pi<double>();
  return static_cast<int>(std::ceil(1.0 + std::sqrt(std::log(1.0 / tol) / (pi * n_dim * tau_im))));
}

// Frame-normalized value of Psi_l at (p, q): the holomorphic series times
// (N/4pi)^{1/4} |t|^{r+1/2} |Omega_mu|, so that |result|^2 is the pointwise norm.
//
// Each series term n = l + N m contributes
//   exp(-(pi b / N) (n + N q)^2) * exp(2 pi i (n p + a (n q + n^2 / 2N))),
// which is exp(2 pi i theta_{l,m}(z)) with the factor exp(-pi b N q^2) folded in.
template <typename Real>
FrameValue<Real> theta_frame(int n_dim, const Real& tau_re, const Real& tau_im, std::int64_t l,
                             const Real& p, const Real& q, int terms) {
  using std::cos;
  using std::exp;
  using std::floor;
  using std::sin;
  using std::sqrt;
  const Real pi = boost::math::constants::pi<Real>();
  const Real n_real = Real(n_dim);

  std::int64_t l0 = l % n_dim;
  if (l0 < 0) l0 += n_dim;
  // Dominant m puts n = l0 + N m closest to -N q.
  const Real centre = -(Real(l0) / n_real + q);
  const auto m0 = static_cast<std::int64_t>(floor(centre + Real(0.5)));

  Real re = 0;
  Real im = 0;
  for (std::int64_t m = m0 - terms; m <= m0 + terms; ++m) {
    const Real n = Real(l0 + n_dim * m);
    const Real d = n + n_real * q;
    const Real mag = exp(-pi * tau_im / n_real * d * d);
    Real turns = n * p + tau_re * (n * q + n * n / (2 * n_real));
    turns -= floor(turns);
    const Real phase = 2 * pi * turns;
    re += mag * cos(phase);
    im += mag * sin(phase);
  }
  const Real scale = sqrt(sqrt(n_real * tau_im / (8 * pi * pi)));
  return {re * scale, im * scale};
}

}  // namespace so3bt::detail
