#pragma once

#include <random>

#include "qcorr/linalg.hpp"

namespace qcorr::testing {

inline ComplexMatrix random_complex(std::mt19937_64& gen, int rows, int cols) {
  std::normal_distribution<double> n;
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(n(gen), n(gen));
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& gen, int n) {
  const ComplexMatrix g = random_complex(gen, n, n);
  return 0.5 * (g + g.adjoint());
}

/// Ginibre-distributed mixed state; rank 1..4.
inline DensityMatrix random_state(std::mt19937_64& gen, int rank = 4) {
  const ComplexMatrix g = random_complex(gen, 4, rank);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix::from_matrix(m);
}

/// Haar unitary via QR of a Ginibre matrix with phase correction.
inline ComplexMatrix random_unitary(std::mt19937_64& gen, int n) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_complex(gen, n, n));
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

inline DensityMatrix local_rotate(const DensityMatrix& rho, const ComplexMatrix& u1, const ComplexMatrix& u2) {
  const ComplexMatrix u = kron(u1, u2);
  return DensityMatrix::from_matrix(u * rho.matrix() * u.adjoint());
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline const Eigen::Vector4cd& phi_plus() {
  static const Eigen::Vector4cd v = [] {
    Eigen::Vector4cd x = Eigen::Vector4cd::Zero();
    x(0) = x(3) = 1.0 / std::sqrt(2.0);
    return x;
  }();
  return v;
}

}  // namespace qcorr::testing
