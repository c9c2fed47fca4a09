#pragma once

// Primal-dual interior-point solver for the small semidefinite programs that
// define steerable weights:
//
//   maximize   Tr sum_v sigma_v
//   subject to sigma_v >= 0                          (v = 0..num_vars-1)
//              K_k - sum_{v in set_k} sigma_v >= 0   (k = 0..num_constraints-1)
//
// with every sigma_v and K_k a 2x2 Hermitian matrix. Each sigma_v is
// parameterized by four real coordinates, so the problem is a real
// linear-matrix-inequality program whose slack S = C - A*(y) is block
// diagonal with 2x2 Hermitian blocks. The certificate side minimizes
// <C, X> over X >= 0 with A(X) = b; its objective bounds ours from above.
// Search directions use Nesterov-Todd scaling.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "qcorr/errors.hpp"
#include "qcorr/linalg.hpp"

namespace qcorr::sdp {

struct Constraint {
  Matrix2c constant = Matrix2c::Zero();
  std::vector<std::size_t> vars;
};

struct Problem {
  std::size_t num_vars = 0;
  std::vector<Constraint> constraints;

  void validate() const {
    if (num_vars == 0) throw SolverFailure("sdp problem has no variables");
    for (const auto& c : constraints) {
      if (!all_finite(c.constant) || hermitian_defect(c.constant) > 1e-10)
        throw SolverFailure("sdp constraint constant is not Hermitian");
      std::vector<bool> seen(num_vars, false);
      for (std::size_t v : c.vars) {
        if (v >= num_vars) throw SolverFailure("sdp constraint references an unknown variable");
        if (seen[v]) throw SolverFailure("sdp constraint lists a variable twice");
        seen[v] = true;
      }
    }
  }
};

enum class Status { Optimal, Infeasible, MaxIterations };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "Optimal";
    case Status::Infeasible:
      return "Infeasible";
    default:
      return "MaxIterations";
  }
}

struct IterationRecord {
  int iteration = 0;
  double primal_objective = 0.0;  // Tr sum sigma_v at the current iterate
  double dual_objective = 0.0;    // <C, X>
  double gap = 0.0;               // <X, S>
  double primal_residual = 0.0;   // ||C - A*(y) - S||
  double dual_residual = 0.0;     // ||b - A(X)||
};

struct Solution {
  std::vector<Matrix2c> variables;
  double objective_value = 0.0;
  double dual_bound = 0.0;
  Status status = Status::MaxIterations;
  double duality_gap = std::numeric_limits<double>::infinity();
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> trace;
};

struct Options {
  int max_iterations = 200;
  double gap_target = 1e-9;
  double gap_accept = 1e-7;
  double feasibility_tol = 1e-9;
  double step_fraction = 0.98;
  double max_centering = 0.2;  // upper bound on the barrier reduction factor
  double divergence = 1e8;
  bool record_trace = false;
};

namespace detail {

inline const std::array<Matrix2c, 4>& coordinate_basis() {
  static const std::array<Matrix2c, 4> basis = [] {
    std::array<Matrix2c, 4> e;
    e[0] << 1, 0, 0, 0;
    e[1] << 0, 1, 1, 0;
    e[2] << 0, Complex(0, 1), Complex(0, -1), 0;
    e[3] << 0, 0, 0, 1;
    return e;
  }();
  return basis;
}

inline Matrix2c hermitize(const Matrix2c& m) { return 0.5 * (m + m.adjoint()); }

inline double inner(const Matrix2c& a, const Matrix2c& b) { return (a.adjoint() * b).trace().real(); }

// Tr(E_a M) for the four coordinate matrices.
inline Eigen::Vector4d coords_of(const Matrix2c& m) {
  return {m(0, 0).real(), 2.0 * m(0, 1).real(), 2.0 * m(0, 1).imag(), m(1, 1).real()};
}

inline Matrix2c matrix_of(const double* y) {
  Matrix2c m;
  m << y[0], Complex(y[1], y[2]), Complex(y[1], -y[2]), y[3];
  return m;
}

inline double min_eig(const Matrix2c& m) {
  const Matrix2c h = hermitize(m);
  const double a = h(0, 0).real(), d = h(1, 1).real();
  const double off = std::abs(h(0, 1));
  return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + off * off);
}

// Largest alpha in (0, inf] keeping M + alpha * D positive semidefinite.
inline double max_step(const Matrix2c& m, const Matrix2c& d) {
  const Eigen::LLT<Matrix2c> llt(hermitize(m));
  const Matrix2c l_inv = llt.matrixL().solve(Matrix2c::Identity());
  const double lam = min_eig(l_inv * d * l_inv.adjoint());
  return lam < 0.0 ? -1.0 / lam : std::numeric_limits<double>::infinity();
}

// Nesterov-Todd scaling point W with W S W = X, computed from Cholesky
// factors and an SVD for numerical stability near the boundary.
inline Matrix2c nt_scaling(const Matrix2c& x, const Matrix2c& s) {
  const Matrix2c lx = Eigen::LLT<Matrix2c>(hermitize(x)).matrixL();
  const Matrix2c ls = Eigen::LLT<Matrix2c>(hermitize(s)).matrixL();
  Eigen::JacobiSVD<Matrix2c> svd(ls.adjoint() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector2d sv = svd.singularValues();
  const Matrix2c g = lx * svd.matrixV() * sv.cwiseSqrt().cwiseInverse().asDiagonal();
  return hermitize(g * g.adjoint());
}

class Workspace {
 public:
  Workspace(const Problem& problem, const Options& options)
      : prob_(problem), opt_(options), nv_(problem.num_vars), nc_(problem.constraints.size()), m_(4 * nv_) {
    c_.assign(nv_ + nc_, Matrix2c::Zero());
    for (std::size_t k = 0; k < nc_; ++k) c_[nv_ + k] = hermitize(problem.constraints[k].constant);
    b_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t v = 0; v < nv_; ++v) {
      b_(4 * v) = 1.0;
      b_(4 * v + 3) = 1.0;
    }
  }

  Solution run() {
    initialize();
    Solution sol;
    // Best iterate with a feasible primal point.
    struct Best {
      double gap = std::numeric_limits<double>::infinity();
      double rd = 0.0, rp = 0.0, dobj = 0.0;
      Eigen::VectorXd y;
    } best;
    int best_iteration = 0;
    for (int it = 0; it < opt_.max_iterations; ++it) {
      const auto rd = slack_residual();
      const Eigen::VectorXd rp = b_ - apply_a(x_);
      const double pobj = b_.dot(y_);
      double dobj = 0.0, gap = 0.0;
      for (std::size_t j = 0; j < blocks(); ++j) {
        dobj += inner(c_[j], x_[j]);
        gap += inner(x_[j], s_[j]);
      }
      double rd_norm = 0.0;
      for (const auto& r : rd) rd_norm = std::max(rd_norm, r.cwiseAbs().maxCoeff());
      const double rp_norm = rp.cwiseAbs().maxCoeff();
      const double violation = primal_violation();
      if (opt_.record_trace) sol.trace.push_back({it, pobj, dobj, gap, violation, rp_norm});
      sol.iterations = it;

      if (!std::isfinite(pobj) || !std::isfinite(dobj) || std::abs(pobj) > opt_.divergence ||
          std::abs(dobj) > opt_.divergence || y_.cwiseAbs().maxCoeff() > opt_.divergence) {
        // A certified iterate already proves feasibility.
        if (best.gap <= opt_.gap_accept) break;
        sol.status = Status::Infeasible;
        finish(sol, gap, violation, rp_norm, dobj);
        return sol;
      }

      const double report_gap = certified_gap(pobj, dobj, gap, rp_norm);
      if (violation <= kFallbackPrimalTol && report_gap < best.gap) {
        best = {report_gap, violation, rp_norm, dobj, y_};
        best_iteration = it;
      }
      if (report_gap <= opt_.gap_target && violation <= opt_.feasibility_tol) {
        sol.status = Status::Optimal;
        finish(sol, report_gap, violation, rp_norm, dobj);
        return sol;
      }
      // Near the optimum round-off eventually stalls progress; stop before it
      // degrades the iterates.
      if (best.gap <= opt_.gap_accept && it - best_iteration >= kStallIterations) break;

      const double mu = gap / static_cast<double>(2 * blocks());
      // Predictor: pure Newton step towards complementarity.
      Direction aff = direction(rd, rp, 0.0);
      const double ap_aff = step_length(x_, aff.dx, 1.0);
      const double ad_aff = step_length(s_, aff.ds, 1.0);
      double gap_aff = 0.0;
      for (std::size_t j = 0; j < blocks(); ++j)
        gap_aff += inner(x_[j] + ap_aff * aff.dx[j], s_[j] + ad_aff * aff.ds[j]);
      const double ratio = gap_aff / std::max(gap, 1e-300);
      const double centering =
          std::isfinite(ratio) ? std::clamp(ratio * ratio * ratio, 0.0, opt_.max_centering) : opt_.max_centering;

      Direction dir = direction(rd, rp, centering * mu);
      const double ap = step_length(x_, dir.dx, opt_.step_fraction);
      const double ad = step_length(s_, dir.ds, opt_.step_fraction);
      if (!std::isfinite(ap) || !std::isfinite(ad) || !dir.dy.allFinite()) break;
      for (std::size_t j = 0; j < blocks(); ++j) {
        x_[j] = hermitize(x_[j] + ap * dir.dx[j]);
        s_[j] = hermitize(s_[j] + ad * dir.ds[j]);
      }
      y_ += ad * dir.dy;

      if (std::max(ap, ad) < 1e-12) break;
    }

    // Iteration budget exhausted or progress stalled: fall back on the best
    // feasible iterate seen.
    if (best.gap <= opt_.gap_accept) {
      y_ = best.y;
      sol.status = Status::Optimal;
      finish(sol, best.gap, best.rd, best.rp, best.dobj);
      return sol;
    }
    const Eigen::VectorXd rp = b_ - apply_a(x_);
    double dobj = 0.0, gap = 0.0;
    for (std::size_t j = 0; j < blocks(); ++j) {
      dobj += inner(c_[j], x_[j]);
      gap += inner(x_[j], s_[j]);
    }
    const double rp_norm = rp.cwiseAbs().maxCoeff();
    const double report_gap = certified_gap(b_.dot(y_), dobj, gap, rp_norm);
    sol.status = Status::MaxIterations;
    finish(sol, report_gap, primal_violation(), rp_norm, dobj);
    return sol;
  }

 private:
  static constexpr double kFallbackPrimalTol = 1e-8;
  static constexpr int kStallIterations = 8;

  // Largest PSD violation of C - A*(y) over all blocks: how far the current
  // sigma is from satisfying sigma_v >= 0 and every constraint.
  double primal_violation() const {
    double v = 0.0;
    for (const auto& b : slack(y_)) v = std::max(v, -min_eig(b));
    return v;
  }

  // Gap that stays valid when the certificate X is only nearly feasible.
  // Every feasible point has ||y||_1 <= 2 Tr sum sigma (the variables are
  // PSD and b picks out their traces), so with rp = b - A(X)
  //   p* = <C, X> - <S, X> - y.rp <= dobj + 2 p* |rp|_inf,
  // i.e. p* <= dobj / (1 - 2 |rp|_inf).
  static double certified_gap(double pobj, double dobj, double gap, double rp_norm) {
    if (!(rp_norm < 0.25)) return std::numeric_limits<double>::infinity();
    const double upper = dobj / (1.0 - 2.0 * rp_norm);
    return std::max({gap, std::abs(dobj - pobj), upper - pobj});
  }

  struct Direction {
    std::vector<Matrix2c> dx, ds;
    Eigen::VectorXd dy;
  };

  std::size_t blocks() const { return nv_ + nc_; }

  void initialize() {
    // sigma_v = eps I, shrunk when needed so that every constraint block with
    // a positive definite constant starts strictly feasible.
    double eps = 1e-3 / static_cast<double>(nv_);
    for (std::size_t k = 0; k < nc_; ++k) {
      const double lo = min_eig(c_[nv_ + k]);
      const auto deg = prob_.constraints[k].vars.size();
      if (lo > 0.0 && deg > 0) eps = std::min(eps, 0.5 * lo / static_cast<double>(deg));
    }
    y_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t v = 0; v < nv_; ++v) {
      y_(4 * v) = eps;
      y_(4 * v + 3) = eps;
    }
    double scale = 1.0;
    for (const auto& c : c_) scale = std::max(scale, c.cwiseAbs().maxCoeff());
    x_.assign(blocks(), scale * Matrix2c::Identity());
    s_.assign(blocks(), Matrix2c::Identity());

    // Use the exact slack wherever the start is strictly feasible.
    const auto s0 = slack(y_);
    for (std::size_t j = 0; j < blocks(); ++j)
      if (min_eig(s0[j]) > 1e-12) s_[j] = s0[j];

    // Certificate side: X_k = t I, X_v = (t deg(v) - 1) I satisfies A(X) = b.
    std::vector<std::size_t> degree(nv_, 0);
    for (const auto& c : prob_.constraints)
      for (std::size_t v : c.vars) ++degree[v];
    const std::size_t min_degree = *std::min_element(degree.begin(), degree.end());
    if (min_degree > 0) {
      const double t = 2.0 * scale / static_cast<double>(min_degree);
      for (std::size_t v = 0; v < nv_; ++v)
        x_[v] = (t * static_cast<double>(degree[v]) - 1.0) * Matrix2c::Identity();
      for (std::size_t k = 0; k < nc_; ++k) x_[nv_ + k] = t * Matrix2c::Identity();
    }
  }

  // A*(dy): the block-diagonal image of a coordinate vector.
  std::vector<Matrix2c> apply_a_adjoint(const Eigen::VectorXd& y) const {
    std::vector<Matrix2c> out(blocks(), Matrix2c::Zero());
    for (std::size_t v = 0; v < nv_; ++v) out[v] = -matrix_of(y.data() + 4 * v);
    for (std::size_t k = 0; k < nc_; ++k)
      for (std::size_t v : prob_.constraints[k].vars) out[nv_ + k] += matrix_of(y.data() + 4 * v);
    return out;
  }

  Eigen::VectorXd apply_a(const std::vector<Matrix2c>& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t v = 0; v < nv_; ++v) out.segment<4>(4 * v) -= coords_of(x[v]);
    for (std::size_t k = 0; k < nc_; ++k) {
      const Eigen::Vector4d ck = coords_of(x[nv_ + k]);
      for (std::size_t v : prob_.constraints[k].vars) out.segment<4>(4 * v) += ck;
    }
    return out;
  }

  std::vector<Matrix2c> slack(const Eigen::VectorXd& y) const {
    auto ay = apply_a_adjoint(y);
    for (std::size_t j = 0; j < blocks(); ++j) ay[j] = c_[j] - ay[j];
    return ay;
  }

  std::vector<Matrix2c> slack_residual() const {
    auto r = slack(y_);
    for (std::size_t j = 0; j < blocks(); ++j) r[j] -= s_[j];
    return r;
  }

  static double step_length(const std::vector<Matrix2c>& base, const std::vector<Matrix2c>& d, double fraction) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < base.size(); ++j) alpha = std::min(alpha, max_step(base[j], d[j]));
    return std::min(1.0, fraction * alpha);
  }

  // Solves  A*(dy) + dS = Rd,  A(dX) = rp,  dX + W dS W = target S^{-1} - X.
  Direction direction(const std::vector<Matrix2c>& rd, const Eigen::VectorXd& rp, double target) const {
    const auto& basis = coordinate_basis();
    std::vector<Matrix2c> w(blocks()), rc(blocks());
    for (std::size_t j = 0; j < blocks(); ++j) {
      w[j] = nt_scaling(x_[j], s_[j]);
      rc[j] = hermitize(target * s_[j].inverse() - x_[j]);
    }

    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    auto local = [&](const Matrix2c& wj) {
      Eigen::Matrix4d g;
      std::array<Matrix2c, 4> we;
      for (int a = 0; a < 4; ++a) we[a] = wj * basis[a] * wj;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) g(a, b) = (basis[a] * we[b]).trace().real();
      return g;
    };
    for (std::size_t v = 0; v < nv_; ++v) schur.block<4, 4>(4 * v, 4 * v) += local(w[v]);
    for (std::size_t k = 0; k < nc_; ++k) {
      const Eigen::Matrix4d g = local(w[nv_ + k]);
      for (std::size_t v1 : prob_.constraints[k].vars)
        for (std::size_t v2 : prob_.constraints[k].vars) schur.block<4, 4>(4 * v1, 4 * v2) += g;
    }

    std::vector<Matrix2c> tmp(blocks());
    for (std::size_t j = 0; j < blocks(); ++j) tmp[j] = rc[j] - w[j] * rd[j] * w[j];
    const Eigen::VectorXd rhs = rp - apply_a(tmp);

    Direction d;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(0.5 * (schur + schur.transpose()));
    d.dy = ldlt.solve(rhs);
    if (!d.dy.allFinite()) d.dy = schur.completeOrthogonalDecomposition().solve(rhs);
    const auto ady = apply_a_adjoint(d.dy);
    d.ds.resize(blocks());
    d.dx.resize(blocks());
    for (std::size_t j = 0; j < blocks(); ++j) {
      d.ds[j] = hermitize(rd[j] - ady[j]);
      d.dx[j] = hermitize(rc[j] - w[j] * d.ds[j] * w[j]);
    }
    return d;
  }

  void finish(Solution& sol, double gap, double rd_norm, double rp_norm, double dobj) const {
    sol.variables.clear();
    for (std::size_t v = 0; v < nv_; ++v) sol.variables.push_back(matrix_of(y_.data() + 4 * v));
    sol.objective_value = b_.dot(y_);
    sol.dual_bound = dobj;
    sol.duality_gap = gap;
    sol.primal_residual = rd_norm;
    sol.dual_residual = rp_norm;
  }

  const Problem& prob_;
  Options opt_;
  std::size_t nv_, nc_, m_;
  std::vector<Matrix2c> c_;
  Eigen::VectorXd b_;
  Eigen::VectorXd y_;
  std::vector<Matrix2c> x_, s_;
};

}  // namespace detail

/// Constant shift used when the first attempt stalls; see solve().
inline constexpr double kRegularization = 1e-9;

inline Solution solve(const Problem& problem, const Options& options = {}) {
  problem.validate();
  Solution sol = detail::Workspace(problem, options).run();
  if (sol.status != Status::MaxIterations) return sol;

  // Singular constants (pure-state assemblages) leave no strictly feasible
  // point and can stall the infeasible start. K_k + delta I restores an
  // interior; the optimum moves by at most delta * Tr X, far below the gap
  // tolerance, and the returned variables violate the original constraints
  // by at most delta.
  Problem shifted = problem;
  for (auto& c : shifted.constraints) c.constant += kRegularization * Matrix2c::Identity();
  Solution retry = detail::Workspace(shifted, options).run();
  if (retry.status == Status::Optimal) {
    retry.iterations += sol.iterations;
    return retry;
  }
  return sol;
}

/// Iteration trace as CSV; requires `Options::record_trace`.
inline void write_trace_csv(std::ostream& os, const Solution& sol) {
  os << "iteration,primal_objective,dual_objective,gap\n";
  for (const auto& r : sol.trace)
    os << r.iteration << ',' << r.primal_objective << ',' << r.dual_objective << ',' << r.gap << '\n';
}

}  // namespace qcorr::sdp
