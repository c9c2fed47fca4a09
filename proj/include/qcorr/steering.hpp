#pragma once

// Steerable weights of two-qubit states. Alice measures two or three
// dichotomic observables; Bob's conditional states form an assemblage whose
// largest unsteerable (local-hidden-state) component is found by SDP.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "qcorr/errors.hpp"
#include "qcorr/linalg.hpp"
#include "qcorr/sdp.hpp"

namespace qcorr {

/// Bob's unnormalized conditional states for one of Alice's settings.
struct SettingOutcomes {
  Matrix2c plus = Matrix2c::Zero();   // outcome +1
  Matrix2c minus = Matrix2c::Zero();  // outcome -1
};

/// Map (setting index, outcome) -> sigma_{a|x}. Setting order follows the
/// observables passed to `assemblage`.
struct Assemblage {
  std::vector<SettingOutcomes> settings;

  const Matrix2c& entry(std::size_t setting, int outcome) const {
    return outcome > 0 ? settings.at(setting).plus : settings.at(setting).minus;
  }
};

enum class PauliPair { XY, XZ, YZ };

inline const char* to_string(PauliPair p) {
  switch (p) {
    case PauliPair::XY:
      return "XY";
    case PauliPair::XZ:
      return "XZ";
    default:
      return "YZ";
  }
}

inline std::array<int, 2> pauli_indices(PauliPair p) {
  switch (p) {
    case PauliPair::XY:
      return {0, 1};
    case PauliPair::XZ:
      return {0, 2};
    default:
      return {1, 2};
  }
}

struct SteeringReport {
  double s3 = 0.0;
  double s2_xy = 0.0;
  double s2_xz = 0.0;
  double s2_yz = 0.0;
  double s2 = 0.0;
  std::optional<double> s2_optimized;
};

/// sigma_{a|x} = Tr_A[(Pi_{a|x} (x) I) rho] with Pi_{+-|x} = (I +- O_x) / 2.
inline Assemblage assemblage(const DensityMatrix& rho, const std::vector<Matrix2c>& observables) {
  Assemblage out;
  for (const auto& o : observables) {
    if (!all_finite(o) || hermitian_defect(o) > 1e-9) throw InvalidObservable("observable is not Hermitian");
    const auto es = eig_hermitian(o, 1e-9);
    if (std::abs(es.values(0) + 1.0) > 1e-9 || std::abs(es.values(1) - 1.0) > 1e-9)
      throw InvalidObservable("observable spectrum is not {-1, +1}");
    const Matrix2c id = Matrix2c::Identity();
    const Matrix2c oh = 0.5 * (o + o.adjoint());
    SettingOutcomes so;
    for (int sign : {+1, -1}) {
      const Matrix2c proj = 0.5 * (id + static_cast<double>(sign) * oh);
      const Matrix4c lifted = kron(proj, id);
      const Matrix4c conditioned = lifted * rho.matrix();
      Matrix2c bob = Matrix2c::Zero();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) bob(i, j) += conditioned(2 * k + i, 2 * k + j);
      bob = 0.5 * (bob + bob.adjoint());
      (sign > 0 ? so.plus : so.minus) = bob;
    }
    out.settings.push_back(so);
  }
  return out;
}

/// Local-hidden-state SDP for an n-setting assemblage. Hidden variables
/// lambda range over {-1,+1}^n in binary ascending order with the first
/// setting most significant: lambda_0 = [-1,...,-1], lambda_{2^n-1} = [+1,...,+1].
/// Constraints come in (setting, +1), (setting, -1) order.
inline sdp::Problem steering_problem(const Assemblage& a) {
  const std::size_t n = a.settings.size();
  if (n == 0 || n > 8) throw InvalidObservable("steering problem needs between 1 and 8 settings");
  sdp::Problem prob;
  prob.num_vars = std::size_t{1} << n;
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t bit = n - 1 - x;
    for (int outcome : {+1, -1}) {
      sdp::Constraint c;
      c.constant = a.entry(x, outcome);
      for (std::size_t lambda = 0; lambda < prob.num_vars; ++lambda) {
        const bool is_plus = ((lambda >> bit) & 1u) != 0;
        if (is_plus == (outcome > 0)) c.vars.push_back(lambda);
      }
      prob.constraints.push_back(std::move(c));
    }
  }
  return prob;
}

/// 1 - max Tr sum_lambda sigma_lambda, clamped to [0, 1].
inline double steerable_weight(const Assemblage& a, const sdp::Options& options = {}) {
  const auto sol = sdp::solve(steering_problem(a), options);
  if (sol.status != sdp::Status::Optimal)
    throw SolverFailure(std::string("steering SDP did not converge: ") + sdp::to_string(sol.status));
  return std::clamp(1.0 - sol.objective_value, 0.0, 1.0);
}

inline double steerable_weight_s3(const DensityMatrix& rho) {
  return steerable_weight(assemblage(rho, {pauli::x(), pauli::y(), pauli::z()}));
}

inline double steerable_weight_s2_pair(const DensityMatrix& rho, PauliPair pair) {
  const auto idx = pauli_indices(pair);
  return steerable_weight(assemblage(rho, {pauli::by_index(idx[0]), pauli::by_index(idx[1])}));
}

inline double steerable_weight_s2(const DensityMatrix& rho) {
  double best = 0.0;
  for (PauliPair p : {PauliPair::XY, PauliPair::XZ, PauliPair::YZ})
    best = std::max(best, steerable_weight_s2_pair(rho, p));
  return best;
}

/// Rz(alpha) Ry(beta) Rz(gamma).
inline Matrix2c euler_unitary(double alpha, double beta, double gamma) {
  auto rz = [](double t) {
    Matrix2c m = Matrix2c::Zero();
    m(0, 0) = std::polar(1.0, -t / 2.0);
    m(1, 1) = std::polar(1.0, t / 2.0);
    return m;
  };
  Matrix2c ry;
  ry << std::cos(beta / 2.0), -std::sin(beta / 2.0), std::sin(beta / 2.0), std::cos(beta / 2.0);
  return rz(alpha) * ry * rz(gamma);
}

namespace detail {

// Downhill simplex maximization with a fixed evaluation budget.
template <typename F>
std::pair<std::array<double, 3>, double> nelder_mead_max(F&& f, std::array<double, 3> start, double step,
                                                         int budget) {
  using Point = std::array<double, 3>;
  std::array<Point, 4> simplex;
  std::array<double, 4> value{};
  int evals = 0;
  auto eval = [&](const Point& p) {
    ++evals;
    return f(p);
  };
  simplex[0] = start;
  value[0] = eval(start);
  for (int i = 0; i < 3; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step;
    value[i + 1] = eval(simplex[i + 1]);
  }
  auto along = [](const Point& c, const Point& p, double t) {
    Point r;
    for (int i = 0; i < 3; ++i) r[i] = c[i] + t * (p[i] - c[i]);
    return r;
  };
  while (evals < budget) {
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int l, int r) { return value[l] > value[r]; });
    const int best = order[0], worst = order[3], second_worst = order[2];
    if (std::abs(value[best] - value[worst]) < 1e-12) {
      double spread = 0.0;
      for (int i = 0; i < 3; ++i) spread = std::max(spread, std::abs(simplex[best][i] - simplex[worst][i]));
      if (spread < 1e-7) break;
    }
    Point centroid{0, 0, 0};
    for (int k : {order[0], order[1], order[2]})
      for (int i = 0; i < 3; ++i) centroid[i] += simplex[k][i] / 3.0;

    const Point reflected = along(centroid, simplex[worst], -1.0);
    const double fr = eval(reflected);
    if (fr > value[best]) {
      const Point expanded = along(centroid, simplex[worst], -2.0);
      const double fe = eval(expanded);
      if (fe > fr) {
        simplex[worst] = expanded;
        value[worst] = fe;
      } else {
        simplex[worst] = reflected;
        value[worst] = fr;
      }
    } else if (fr > value[second_worst]) {
      simplex[worst] = reflected;
      value[worst] = fr;
    } else {
      const Point contracted = along(centroid, simplex[worst], 0.5);
      const double fc = eval(contracted);
      if (fc > value[worst]) {
        simplex[worst] = contracted;
        value[worst] = fc;
      } else {
        for (int k : {order[1], order[2], order[3]}) {
          simplex[k] = along(simplex[best], simplex[k], 0.5);
          value[k] = eval(simplex[k]);
        }
      }
    }
  }
  const auto it = std::max_element(value.begin(), value.end());
  return {simplex[static_cast<std::size_t>(it - value.begin())], *it};
}

}  // namespace detail

struct PvmSearchOptions {
  int grid = 12;
  int refine_evaluations = 200;
};

/// Two-setting steerable weight maximized over Alice's observables
/// U s_i U^dag, U s_j U^dag for a shared single-qubit unitary U.
inline double steerable_weight_s2_optimized(const DensityMatrix& rho, const PvmSearchOptions& opts = {}) {
  auto objective = [&](const std::array<double, 3>& angles) {
    const Matrix2c u = euler_unitary(angles[0], angles[1], angles[2]);
    double best = 0.0;
    for (PauliPair p : {PauliPair::XY, PauliPair::XZ, PauliPair::YZ}) {
      const auto idx = pauli_indices(p);
      const Matrix2c o1 = u * pauli::by_index(idx[0]) * u.adjoint();
      const Matrix2c o2 = u * pauli::by_index(idx[1]) * u.adjoint();
      best = std::max(best, steerable_weight(assemblage(rho, {o1, o2})));
    }
    return best;
  };

  const double two_pi = 2.0 * std::numbers::pi;
  std::array<double, 3> best_angles{0, 0, 0};
  double best = -1.0;
  for (int i = 0; i < opts.grid; ++i)
    for (int j = 0; j < opts.grid; ++j)
      for (int k = 0; k < opts.grid; ++k) {
        const std::array<double, 3> a{two_pi * i / opts.grid, std::numbers::pi * j / opts.grid,
                                      two_pi * k / opts.grid};
        const double v = objective(a);
        if (v > best) {
          best = v;
          best_angles = a;
        }
      }
  const auto refined =
      detail::nelder_mead_max(objective, best_angles, std::numbers::pi / opts.grid, opts.refine_evaluations);
  return std::max(best, refined.second);
}

inline SteeringReport steering_report(const DensityMatrix& rho, bool optimize_pvm = false) {
  SteeringReport r;
  r.s3 = steerable_weight_s3(rho);
  r.s2_xy = steerable_weight_s2_pair(rho, PauliPair::XY);
  r.s2_xz = steerable_weight_s2_pair(rho, PauliPair::XZ);
  r.s2_yz = steerable_weight_s2_pair(rho, PauliPair::YZ);
  r.s2 = std::max({r.s2_xy, r.s2_xz, r.s2_yz});
  if (optimize_pvm) r.s2_optimized = std::max(steerable_weight_s2_optimized(rho), r.s2);
  return r;
}

}  // namespace qcorr
