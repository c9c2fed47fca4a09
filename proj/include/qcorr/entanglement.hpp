#pragma once

// Negativity and Wootters concurrence of two-qubit states, with the
// closed forms for generalized Werner states.

#include <algorithm>
#include <cmath>

#include "qcorr/linalg.hpp"
#include "qcorr/states.hpp"

namespace qcorr {

/// N = max(0, -2 mu_min) with mu_min the smallest eigenvalue of rho^T_B.
inline double negativity(const DensityMatrix& rho) {
  const double mu_min = eig_hermitian(partial_transpose(rho, Subsystem::second)).values(0);
  return std::max(0.0, -2.0 * mu_min);
}

/// C = max(0, 2 lambda_max - sum lambda_j), lambda_j^2 the eigenvalues of
/// rho (Y (x) Y) rho* (Y (x) Y). R is similar to the Hermitian
/// sqrt(rho) rho~ sqrt(rho), whose spectrum is used instead.
inline double concurrence(const DensityMatrix& rho) {
  const Matrix4c yy = kron(pauli::y(), pauli::y());
  const Matrix4c flipped = yy * rho.matrix().conjugate() * yy;
  const ComplexMatrix root = sqrt_psd(rho.matrix());
  const ComplexMatrix r = root * flipped * root;
  const auto es = eig_hermitian(0.5 * (r + r.adjoint()), 1e-8);
  const double floor = detail::spectral_floor(es.values);
  double sum = 0.0, largest = 0.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    const double lambda = detail::clamped_sqrt(es.values(k), floor);
    sum += lambda;
    largest = std::max(largest, lambda);
  }
  return std::max(0.0, 2.0 * largest - sum);
}

inline double negativity_gws_closed(const GwsParams& params) {
  params.validate();
  const double x = params.q * (1.0 - params.q);
  return std::max(0.0, 0.5 * (params.p * (1.0 + 4.0 * std::sqrt(x)) - 1.0));
}

/// Smallest p at which gws(p, q) becomes entangled.
inline double threshold_p_n(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParamOutOfRange("q must lie in [0,1]");
  return 1.0 / (1.0 + 4.0 * std::sqrt(q * (1.0 - q)));
}

}  // namespace qcorr
