#pragma once

// Dense complex linear algebra for two-qubit states: Hermitian
// eigendecomposition, Kronecker products, partial transpose/trace and the
// Uhlmann fidelity. Dimensions are tiny (2..16), so everything here favours
// robustness over speed.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "qcorr/errors.hpp"

namespace qcorr {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Matrix3r = Eigen::Matrix3d;
using Vector3r = Eigen::Vector3d;

/// Numerical tolerances shared by the state-validation code. Every entry point
/// that validates takes a `Tolerances` argument defaulting to these values.
struct Tolerances {
  double hermitian = 1e-10;  // max |a_ij - conj(a_ji)|
  double trace = 1e-10;      // |Tr rho - 1|
  double psd = 1e-9;         // allowed negative eigenvalue magnitude
};

namespace pauli {

inline Matrix2c identity() { return Matrix2c::Identity(); }

inline Matrix2c x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix2c y() {
  Matrix2c m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline Matrix2c z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}

/// sigma_1, sigma_2, sigma_3 for index 0, 1, 2.
inline Matrix2c by_index(int i) {
  switch (i) {
    case 0:
      return x();
    case 1:
      return y();
    default:
      return z();
  }
}

}  // namespace pauli

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

inline double hermitian_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct EigenSystem {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // column k belongs to values[k]
};

namespace detail {

struct RealEigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

// Cyclic Jacobi for a real symmetric matrix. Converges quadratically; the
// sweep cap is never reached for the sizes used here.
inline RealEigenSystem jacobi_symmetric(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-17 * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  return {a.diagonal(), v};
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix via Jacobi on its real symmetric
/// embedding [[Re, -Im], [Im, Re]]. Every eigenvalue of h appears twice in
/// the embedding; one complex eigenvector per pair is recovered by greedy
/// complex Gram-Schmidt over the real eigenvectors.
inline EigenSystem eig_hermitian(const ComplexMatrix& h, double hermitian_tol = Tolerances{}.hermitian) {
  if (h.rows() != h.cols()) throw NotHermitian("eig_hermitian: matrix is not square");
  if (!all_finite(h)) throw NotHermitian("eig_hermitian: non-finite entries");
  if (hermitian_defect(h) > hermitian_tol) throw NotHermitian("eig_hermitian: matrix is not Hermitian");

  const Eigen::Index n = h.rows();
  const ComplexMatrix hs = 0.5 * (h + h.adjoint());
  Eigen::MatrixXd emb(2 * n, 2 * n);
  emb.topLeftCorner(n, n) = hs.real();
  emb.topRightCorner(n, n) = -hs.imag();
  emb.bottomLeftCorner(n, n) = hs.imag();
  emb.bottomRightCorner(n, n) = hs.real();
  const auto real_sys = detail::jacobi_symmetric(emb);

  std::vector<Eigen::VectorXcd> candidates;
  candidates.reserve(2 * n);
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    const auto col = real_sys.vectors.col(k);
    Eigen::VectorXcd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = Complex(col(i), col(i + n));
    candidates.push_back(u);
  }

  std::vector<Eigen::VectorXcd> accepted;
  std::vector<bool> used(candidates.size(), false);
  while (static_cast<Eigen::Index>(accepted.size()) < n) {
    std::size_t best = 0;
    double best_norm = -1.0;
    Eigen::VectorXcd best_vec;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      Eigen::VectorXcd r = candidates[c];
      for (const auto& a : accepted) r -= a.dot(r) * a;
      const double nr = r.norm();
      if (nr > best_norm) {
        best_norm = nr;
        best = c;
        best_vec = r;
      }
    }
    used[best] = true;
    best_vec /= best_norm;
    // A second Gram-Schmidt pass keeps orthonormality at machine precision.
    for (const auto& a : accepted) best_vec -= a.dot(best_vec) * a;
    best_vec.normalize();
    accepted.push_back(best_vec);
  }

  std::vector<std::pair<double, Eigen::Index>> order;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double rq = (accepted[k].adjoint() * hs * accepted[k])(0, 0).real();
    order.emplace_back(rq, k);
  }
  std::sort(order.begin(), order.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  EigenSystem out{Eigen::VectorXd(n), ComplexMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = order[k].first;
    out.vectors.col(k) = accepted[order[k].second];
  }
  return out;
}

/// Function of a Hermitian matrix applied through its spectrum.
template <typename F>
ComplexMatrix spectral_apply(const EigenSystem& es, F&& f) {
  Eigen::VectorXd mapped(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k) mapped(k) = f(es.values(k));
  return es.vectors * mapped.asDiagonal() * es.vectors.adjoint();
}

namespace detail {

// Eigenvalues below this fraction of the spectral radius are round-off.
// Their square roots would otherwise leak ~1e-8 into rank-deficient results.
inline double spectral_floor(const Eigen::VectorXd& values) {
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(values.cwiseAbs().maxCoeff(), 1.0);
}

inline double clamped_sqrt(double x, double floor) { return x > floor ? std::sqrt(x) : 0.0; }

}  // namespace detail

/// Square root of a (numerically) PSD matrix; negative and round-off-sized
/// eigenvalues are clamped to zero first.
inline ComplexMatrix sqrt_psd(const ComplexMatrix& m) {
  const auto es = eig_hermitian(m, 1e-8);
  const double floor = detail::spectral_floor(es.values);
  return spectral_apply(es, [floor](double x) { return detail::clamped_sqrt(x, floor); });
}

enum class Subsystem { first, second };

/// Validated two-qubit density matrix. Construction checks Hermiticity,
/// unit trace and positivity; the stored matrix is the exact Hermitian part
/// of the input.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(const ComplexMatrix& m, const Tolerances& tol = {}) {
    if (m.rows() != 4 || m.cols() != 4) throw InvalidState("density matrix must be 4x4");
    if (!all_finite(m)) throw InvalidState("density matrix has non-finite entries");
    if (hermitian_defect(m) > tol.hermitian) throw InvalidState("density matrix is not Hermitian");
    const Matrix4c herm = 0.5 * (m + m.adjoint());
    if (std::abs(herm.trace().real() - 1.0) > tol.trace) throw InvalidState("density matrix trace differs from 1");
    const double min_eig = eig_hermitian(herm).values(0);
    if (min_eig < -tol.psd) throw InvalidState("density matrix is not positive semidefinite");
    return DensityMatrix(herm);
  }

  static DensityMatrix maximally_mixed() { return DensityMatrix(Matrix4c::Identity() / 4.0); }

  /// |psi><psi| for a (not necessarily normalized) nonzero 4-vector.
  static DensityMatrix pure(const Eigen::Vector4cd& psi) {
    const double nrm = psi.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw InvalidState("pure state vector must be nonzero");
    const Eigen::Vector4cd u = psi / nrm;
    return DensityMatrix(u * u.adjoint());
  }

  const Matrix4c& matrix() const { return mat_; }
  Complex operator()(int i, int j) const { return mat_(i, j); }

 private:
  explicit DensityMatrix(const Matrix4c& m) : mat_(m) {}
  Matrix4c mat_;
};

/// Basis ordering is |ab> -> index 2a + b throughout.
inline Matrix4c partial_transpose(const Matrix4c& m, Subsystem which) {
  Matrix4c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2) {
          const Complex v = m(2 * a + b, 2 * a2 + b2);
          if (which == Subsystem::second)
            out(2 * a + b2, 2 * a2 + b) = v;
          else
            out(2 * a2 + b, 2 * a + b2) = v;
        }
  return out;
}

inline Matrix4c partial_transpose(const DensityMatrix& rho, Subsystem which) {
  return partial_transpose(rho.matrix(), which);
}

/// Reduced state after tracing out `traced`.
inline Matrix2c partial_trace(const DensityMatrix& rho, Subsystem traced) {
  Matrix2c out = Matrix2c::Zero();
  const Matrix4c& m = rho.matrix();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        if (traced == Subsystem::first)
          out(i, j) += m(2 * k + i, 2 * k + j);
        else
          out(i, j) += m(2 * i + k, 2 * j + k);
      }
  return out;
}

/// Fidelity with a precomputed square root of the first argument.
inline double fidelity_from_sqrt(const ComplexMatrix& sqrt_a, const ComplexMatrix& b) {
  const ComplexMatrix inner = sqrt_a * b * sqrt_a;
  const auto es = eig_hermitian(0.5 * (inner + inner.adjoint()), 1e-8);
  const double floor = detail::spectral_floor(es.values);
  double tr = 0.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) tr += detail::clamped_sqrt(es.values(k), floor);
  return std::clamp(tr * tr, 0.0, 1.0);
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  return fidelity_from_sqrt(sqrt_psd(a.matrix()), b.matrix());
}

}  // namespace qcorr
