#pragma once

// Correlation hierarchy of generalized Werner states: regime classification,
// threshold curves p_i(q) for each correlation type, and the white-noise
// robustness differences Delta_if(q) = p_i(q) - p_f(q) with their optima.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcorr/entanglement.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/nonlocality.hpp"
#include "qcorr/parallel.hpp"
#include "qcorr/states.hpp"
#include "qcorr/steering.hpp"

namespace qcorr {

enum class Measure { N, B, S2, S3 };

inline const char* to_string(Measure m) {
  switch (m) {
    case Measure::N:
      return "N";
    case Measure::B:
      return "B";
    case Measure::S2:
      return "S2";
    default:
      return "S3";
  }
}

inline Measure parse_measure(std::string_view s) {
  if (s == "N") return Measure::N;
  if (s == "B") return Measure::B;
  if (s == "S2") return Measure::S2;
  if (s == "S3") return Measure::S3;
  throw ParseError("unknown measure '" + std::string(s) + "' (expected N, B, S2 or S3)");
}

/// Zero cutoffs: a measure counts as present only above its cutoff.
struct Cutoffs {
  double entanglement = 1e-8;
  double bell = 1e-8;
  double steering = 2e-6;
  // A flag above a missing lower flag is tolerated (and dropped) while the
  // offending measure stays below this value; beyond it classify() throws.
  double inconsistency_margin = 1e-2;
};

struct RegimeLabel {
  int id = 1;
  bool entangled = false;
  bool s3_steerable = false;
  bool s2_steerable = false;
  bool bell_nonlocal = false;
};

struct CorrelationReport {
  double n = 0.0;
  double c = 0.0;
  double b = 0.0;
  double s2_xy = 0.0;
  double s2_xz = 0.0;
  double s2_yz = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  std::optional<double> s2_optimized;
  RegimeLabel regime;
};

inline RegimeLabel classify(const CorrelationReport& r, const Cutoffs& cut = {}) {
  bool flags[4] = {r.n > cut.entanglement, r.s3 > cut.steering, r.s2 > cut.steering, r.b > cut.bell};
  const double values[4] = {r.n, r.s3, r.s2, r.b};
  const char* names[4] = {"N", "S3", "S2", "B"};
  // Walk downwards: a set flag whose predecessor is unset breaks the chain.
  for (int k = 3; k >= 1; --k) {
    if (flags[k] && !flags[k - 1]) {
      if (values[k] > cut.inconsistency_margin)
        throw InconsistentHierarchy(std::string("classify: ") + names[k] + " present without " + names[k - 1]);
      flags[k] = false;
    }
  }
  for (int k = 3; k >= 1; --k)
    if (flags[k]) flags[k - 1] = true;
  RegimeLabel label;
  label.entangled = flags[0];
  label.s3_steerable = flags[1];
  label.s2_steerable = flags[2];
  label.bell_nonlocal = flags[3];
  label.id = 1 + static_cast<int>(flags[0]) + static_cast<int>(flags[1]) + static_cast<int>(flags[2]) +
             static_cast<int>(flags[3]);
  return label;
}

inline CorrelationReport correlation_report(const DensityMatrix& rho, const Cutoffs& cut = {},
                                            bool optimize_pvm = false) {
  CorrelationReport r;
  r.n = negativity(rho);
  r.c = concurrence(rho);
  r.b = bell_b(rho);
  const SteeringReport st = steering_report(rho, optimize_pvm);
  r.s3 = st.s3;
  r.s2_xy = st.s2_xy;
  r.s2_xz = st.s2_xz;
  r.s2_yz = st.s2_yz;
  r.s2 = st.s2;
  r.s2_optimized = st.s2_optimized;
  r.regime = classify(r, cut);
  return r;
}

// ---------------------------------------------------------------------------
// Thresholds

enum class ThresholdMethod { analytic, bisection };

struct ThresholdSample {
  double q = 0.0;
  double p = 0.0;
};

struct ThresholdCurve {
  Measure measure = Measure::N;
  ThresholdMethod method = ThresholdMethod::analytic;
  std::vector<ThresholdSample> samples;
};

namespace detail {

// True when the steering weight of gws(p, q) for `m` exceeds the cutoff.
// Pairs are evaluated lazily, strongest (XZ) first.
inline bool steering_present(Measure m, double p, double q, double cutoff) {
  const DensityMatrix rho = gws({p, q});
  if (m == Measure::S3) return steerable_weight_s3(rho) > cutoff;
  for (PauliPair pair : {PauliPair::XZ, PauliPair::YZ, PauliPair::XY})
    if (steerable_weight_s2_pair(rho, pair) > cutoff) return true;
  return false;
}

}  // namespace detail

/// Smallest p at which `m` becomes nonzero for gws(p, q). N and B use their
/// closed forms; S2 and S3 are bisected on [p_N(q), 1] to width `tol`.
inline double threshold(Measure m, double q, double tol = 1e-4, const Cutoffs& cut = {}) {
  if (!(q > 0.0 && q < 1.0)) throw ParamOutOfRange("threshold: q must lie in (0,1)");
  if (!(tol > 0.0)) throw ParamOutOfRange("threshold: tol must be positive");
  switch (m) {
    case Measure::N:
      return threshold_p_n(q);
    case Measure::B:
      return threshold_p_b(q);
    default:
      break;
  }
  double lo = threshold_p_n(q), hi = 1.0;
  if (!detail::steering_present(m, hi, q, cut.steering))
    throw NotFound(std::string("threshold: ") + to_string(m) + " stays zero up to p = 1");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (detail::steering_present(m, mid, q, cut.steering))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline ThresholdCurve threshold_curve(Measure m, const std::vector<double>& qs, double tol = 1e-4,
                                      unsigned jobs = default_jobs(), const Cutoffs& cut = {}) {
  ThresholdCurve curve;
  curve.measure = m;
  curve.method = (m == Measure::N || m == Measure::B) ? ThresholdMethod::analytic : ThresholdMethod::bisection;
  std::vector<double> sorted = qs;
  std::sort(sorted.begin(), sorted.end());
  const auto ps = parallel_map(
      sorted.size(), [&](std::size_t i) { return threshold(m, sorted[i], tol, cut); }, jobs);
  for (std::size_t i = 0; i < sorted.size(); ++i) curve.samples.push_back({sorted[i], ps[i]});
  return curve;
}

// ---------------------------------------------------------------------------
// Robustness against white noise

/// Bisection width used when thresholds feed an optimization over q.
inline constexpr double kFineThresholdTol = 1e-11;

inline double delta(Measure i, Measure f, double q, double tol = kFineThresholdTol, const Cutoffs& cut = {}) {
  if (i == f) throw ParamOutOfRange("delta: initial and final measures must differ");
  return threshold(i, q, tol, cut) - threshold(f, q, tol, cut);
}

struct OptimalQ {
  double q_opt = 0.5;
  double delta_max = 0.0;
};

/// Maximizes delta(i, f, q) over q in (0, 1/2]: coarse grid with step 0.01,
/// then golden-section search around the best grid point to width grid_tol.
inline OptimalQ optimal_q(Measure i, Measure f, double grid_tol = 1e-4, unsigned jobs = default_jobs(),
                          const Cutoffs& cut = {}) {
  if (i == f) throw ParamOutOfRange("optimal_q: initial and final measures must differ");
  constexpr int kGrid = 50;
  const auto coarse = parallel_map(
      kGrid, [&](std::size_t k) { return delta(i, f, 0.01 * static_cast<double>(k + 1), kFineThresholdTol, cut); },
      jobs);
  const auto best = static_cast<std::size_t>(std::max_element(coarse.begin(), coarse.end()) - coarse.begin());
  const double q_best = 0.01 * static_cast<double>(best + 1);

  auto fn = [&](double q) { return delta(i, f, q, kFineThresholdTol, cut); };
  double a = std::max(q_best - 0.01, 1e-6), b = std::min(q_best + 0.01, 0.5);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  while (b - a > grid_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = fn(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = fn(x1);
    }
  }
  OptimalQ out{f1 > f2 ? x1 : x2, std::max(f1, f2)};
  if (coarse[best] > out.delta_max) out = {q_best, coarse[best]};
  return out;
}

/// Root q' in (0, 1/2) of (1 + 4x^2)^3 = x^2 (1 + 4x)^4 with x = sqrt(q'(1-q')),
/// the stationarity condition of Delta_BN(q).
inline double sixth_order_residual(double q) {
  const double x = std::sqrt(q * (1.0 - q));
  return std::pow(1.0 + 4.0 * x * x, 3) - x * x * std::pow(1.0 + 4.0 * x, 4);
}

inline double sixth_order_optimal_q() {
  // In x: positive at 0, negative at 1/2.
  auto g = [](double x) { return std::pow(1.0 + 4.0 * x * x, 3) - x * x * std::pow(1.0 + 4.0 * x, 4); };
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * x * x));
}

struct TransitionRow {
  std::string label;  // "(a)" .. "(f)"
  Measure initial = Measure::B;
  Measure final = Measure::N;
  double q_opt = 0.0;
  double p_initial = 0.0;
  double p_final = 0.0;
  double delta_opt = 0.0;
  double delta_half = 0.0;
  double delta_gain = 0.0;  // delta_opt - delta_half
};

inline std::vector<std::pair<Measure, Measure>> table3_transitions() {
  return {{Measure::B, Measure::N},  {Measure::B, Measure::S3},  {Measure::B, Measure::S2},
          {Measure::S2, Measure::N}, {Measure::S2, Measure::S3}, {Measure::S3, Measure::N}};
}

inline std::vector<TransitionRow> table3(double grid_tol = 1e-6, unsigned jobs = default_jobs(),
                                         const Cutoffs& cut = {}) {
  std::vector<TransitionRow> rows;
  const auto transitions = table3_transitions();
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const auto [i, f] = transitions[k];
    TransitionRow row;
    row.label = std::string("(") + static_cast<char>('a' + k) + ")";
    row.initial = i;
    row.final = f;
    const OptimalQ opt = optimal_q(i, f, grid_tol, jobs, cut);
    row.q_opt = opt.q_opt;
    row.p_initial = threshold(i, opt.q_opt, kFineThresholdTol, cut);
    row.p_final = threshold(f, opt.q_opt, kFineThresholdTol, cut);
    row.delta_opt = row.p_initial - row.p_final;
    row.delta_half = delta(i, f, 0.5, kFineThresholdTol, cut);
    row.delta_gain = row.delta_opt - row.delta_half;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qcorr
