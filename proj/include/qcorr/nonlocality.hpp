#pragma once

// Bell-CHSH nonlocality through the Horodecki criterion: the maximal CHSH
// value of a state is 2 sqrt(M) with M the sum of the two largest
// eigenvalues of T^T T.

#include <algorithm>
#include <cmath>

#include "qcorr/linalg.hpp"
#include "qcorr/states.hpp"

namespace qcorr {

inline double horodecki_m(const BlochForm& bloch) {
  const Matrix3r u = bloch.t.transpose() * bloch.t;
  Eigen::SelfAdjointEigenSolver<Matrix3r> solver(u, Eigen::EigenvaluesOnly);
  const auto& h = solver.eigenvalues();  // ascending
  return std::clamp(h(1) + h(2), 0.0, 2.0);
}

inline double horodecki_m(const DensityMatrix& rho) { return horodecki_m(bloch_decompose(rho)); }

/// B = sqrt(max(0, M - 1)); 0 for local states, 1 for maximal violation.
inline double bell_b(const DensityMatrix& rho) {
  return std::sqrt(std::max(0.0, horodecki_m(rho) - 1.0));
}

inline double bell_b_gws_closed(const GwsParams& params) {
  params.validate();
  const double p = params.p, q = params.q;
  return std::sqrt(std::max(0.0, p * p * (1.0 + 4.0 * q * (1.0 - q)) - 1.0));
}

/// Smallest p at which gws(p, q) violates CHSH.
inline double threshold_p_b(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParamOutOfRange("q must lie in [0,1]");
  return 1.0 / std::sqrt(1.0 + 4.0 * q * (1.0 - q));
}

}  // namespace qcorr
