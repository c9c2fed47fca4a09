#pragma once

// State families used throughout: Werner states, generalized Werner states
// (a partially entangled pure state sqrt(1-q)|00> + sqrt(q)|11> mixed with
// white noise), X-shaped states and their Bloch representation.

#include <cmath>

#include "qcorr/errors.hpp"
#include "qcorr/linalg.hpp"

namespace qcorr {

struct GwsParams {
  double p = 0.0;  // weight of the pure component
  double q = 0.5;  // superposition parameter

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw ParamOutOfRange("mixing parameter p must lie in [0,1]");
    if (!(q >= 0.0 && q <= 1.0)) throw ParamOutOfRange("superposition parameter q must lie in [0,1]");
  }
};

/// Local Bloch vectors and the correlation matrix T_ij = Tr[rho (s_i (x) s_j)].
struct BlochForm {
  Vector3r x = Vector3r::Zero();
  Vector3r y = Vector3r::Zero();
  Matrix3r t = Matrix3r::Zero();
};

/// Populations A..D on the diagonal, coherence E between |00> and |11>,
/// coherence F between |01> and |10>.
struct XStateParams {
  double a = 0.25, b = 0.25, c = 0.25, d = 0.25;
  Complex e{0.0, 0.0};
  Complex f{0.0, 0.0};
};

inline Eigen::Vector4cd phi_q(double q) {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(0) = std::sqrt(1.0 - q);
  v(3) = std::sqrt(q);
  return v;
}

/// Raw matrix of gws(p, q) without validation, for inner loops.
inline Matrix4c gws_matrix(double p, double q) {
  const Eigen::Vector4cd phi = phi_q(q);
  return p * (phi * phi.adjoint()) + (1.0 - p) / 4.0 * Matrix4c::Identity();
}

inline DensityMatrix gws(const GwsParams& params) {
  params.validate();
  return DensityMatrix::from_matrix(gws_matrix(params.p, params.q));
}

inline DensityMatrix werner(double p) { return gws({p, 0.5}); }

/// w * rho1 + (1 - w) * rho2.
inline DensityMatrix mix(const DensityMatrix& rho1, const DensityMatrix& rho2, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ParamOutOfRange("mixing weight must lie in [0,1]");
  return DensityMatrix::from_matrix(w * rho1.matrix() + (1.0 - w) * rho2.matrix());
}

inline BlochForm bloch_decompose(const DensityMatrix& rho) {
  BlochForm out;
  const Matrix4c& m = rho.matrix();
  const Matrix2c id = pauli::identity();
  for (int i = 0; i < 3; ++i) {
    const Matrix2c si = pauli::by_index(i);
    out.x(i) = (m * kron(si, id)).trace().real();
    out.y(i) = (m * kron(id, si)).trace().real();
    for (int j = 0; j < 3; ++j) out.t(i, j) = (m * kron(si, pauli::by_index(j))).trace().real();
  }
  return out;
}

/// Inverse of bloch_decompose. The result is not validated: arbitrary Bloch
/// data need not describe a positive operator.
inline Matrix4c bloch_reassemble(const BlochForm& b) {
  const Matrix2c id = pauli::identity();
  Matrix4c m = Matrix4c::Identity();
  for (int i = 0; i < 3; ++i) {
    const Matrix2c si = pauli::by_index(i);
    m += b.x(i) * kron(si, id);
    m += b.y(i) * kron(id, si);
    for (int j = 0; j < 3; ++j) m += b.t(i, j) * kron(si, pauli::by_index(j));
  }
  return m / 4.0;
}

inline DensityMatrix x_state(const XStateParams& s, const Tolerances& tol = {}) {
  const double total = s.a + s.b + s.c + s.d;
  if (std::abs(total - 1.0) > tol.trace) throw InvalidState("x_state: populations must sum to 1");
  if (s.a < -tol.psd || s.b < -tol.psd || s.c < -tol.psd || s.d < -tol.psd)
    throw NotPositiveSemidefinite("x_state: negative population");
  if (std::abs(s.e) > std::sqrt(std::max(s.a * s.d, 0.0)) + 1e-10)
    throw NotPositiveSemidefinite("x_state: |E| exceeds sqrt(AD)");
  if (std::abs(s.f) > std::sqrt(std::max(s.b * s.c, 0.0)) + 1e-10)
    throw NotPositiveSemidefinite("x_state: |F| exceeds sqrt(BC)");
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = s.a;
  m(1, 1) = s.b;
  m(2, 2) = s.c;
  m(3, 3) = s.d;
  m(0, 3) = s.e;
  m(3, 0) = std::conj(s.e);
  m(1, 2) = s.f;
  m(2, 1) = std::conj(s.f);
  return DensityMatrix::from_matrix(m, tol);
}

/// X-form entries of gws(p, q).
inline XStateParams gws_x_params(const GwsParams& params) {
  params.validate();
  const double p = params.p, q = params.q;
  const double noise = (1.0 - p) / 4.0;
  return {p * (1.0 - q) + noise, noise, noise, p * q + noise, Complex(p * std::sqrt(q * (1.0 - q)), 0.0), Complex(0.0, 0.0)};
}

/// Target ratios used when tuning a source to produce gws(p, q).
struct SetupRatios {
  double r_ad = 0.0;
  double visibility = 0.0;
  double r_ab = 0.0;
};

inline SetupRatios setup_ratios(const GwsParams& params) {
  params.validate();
  const double p = params.p, q = params.q;
  if (p >= 1.0) throw DivisionByZero("setup_ratios: r_ab is undefined at p = 1");
  const XStateParams x = gws_x_params(params);
  SetupRatios r;
  r.r_ad = (4.0 * p * q + 1.0 - p) / (4.0 * p * (1.0 - q) + 1.0 - p);
  r.visibility = 2.0 * x.e.real() / (x.a + x.d);
  r.r_ab = (4.0 * p * q + 1.0 - p) / (1.0 - p);
  return r;
}

}  // namespace qcorr
