#pragma once

// Simulated two-qubit polarization tomography: 36 product projections,
// Poisson coincidence counts, iterative maximum-likelihood (R rho R)
// reconstruction and a fidelity fit of (p, q) to the reconstructed state.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qcorr/errors.hpp"
#include "qcorr/linalg.hpp"
#include "qcorr/states.hpp"

namespace qcorr {

inline constexpr std::size_t kNumProjections = 36;

/// Polarization labels in measurement order.
inline constexpr std::array<char, 6> kPolarizationLabels{'H', 'V', 'D', 'A', 'R', 'L'};

/// H=|0>, V=|1>, D=|+>, A=|->, R=(|0>+i|1>)/sqrt2, L=(|0>-i|1>)/sqrt2.
inline Eigen::Vector2cd polarization_state(std::size_t index) {
  const double r = 1.0 / std::numbers::sqrt2;
  switch (index) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return {0.0, 1.0};
    case 2:
      return {r, r};
    case 3:
      return {r, -r};
    case 4:
      return {Complex(r, 0.0), Complex(0.0, r)};
    case 5:
      return {Complex(r, 0.0), Complex(0.0, -r)};
    default:
      throw ParamOutOfRange("polarization index out of range");
  }
}

inline int polarization_index(char label) {
  for (std::size_t i = 0; i < kPolarizationLabels.size(); ++i)
    if (kPolarizationLabels[i] == label) return static_cast<int>(i);
  return -1;
}

/// The 36 projectors |a b><a b|, index 6 * alice + bob.
class ProjectionSet {
 public:
  ProjectionSet() {
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b) {
        Eigen::Vector4cd v;
        const auto va = polarization_state(a), vb = polarization_state(b);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) v(2 * i + j) = va(i) * vb(j);
        projectors_[6 * a + b] = v * v.adjoint();
      }
  }

  const Matrix4c& operator[](std::size_t k) const { return projectors_.at(k); }
  std::size_t size() const { return projectors_.size(); }

  /// Rank of the linear map rho -> (Tr[rho Pi_k])_k over the 16 real
  /// parameters of a Hermitian 4x4 matrix.
  int measurement_rank() const {
    Eigen::MatrixXd map(kNumProjections, 16);
    for (std::size_t k = 0; k < kNumProjections; ++k)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          // Tr[rho P] = sum_ij rho_ij P_ji; split into real/imaginary parts.
          const Complex pji = projectors_[k](j, i);
          if (i == j)
            map(k, 4 * i + j) = pji.real();
          else if (i < j) {
            map(k, 4 * i + j) = 2.0 * pji.real();   // Re rho_ij
            map(k, 4 * j + i) = -2.0 * pji.imag();  // Im rho_ij
          }
        }
    return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(map).rank());
  }

 private:
  std::array<Matrix4c, kNumProjections> projectors_;
};

inline const ProjectionSet& projections() {
  static const ProjectionSet set;
  return set;
}

inline constexpr const char* kRngName = "mt19937_64+std::poisson_distribution(libstdc++)";

struct CountRecord {
  std::array<std::uint64_t, kNumProjections> counts{};
  double exposure = 0.0;  // expected total counts per measurement setting
  std::string rng = kRngName;
};

inline std::array<double, kNumProjections> born_probabilities(const Matrix4c& rho) {
  std::array<double, kNumProjections> out{};
  const auto& set = projections();
  for (std::size_t k = 0; k < kNumProjections; ++k) out[k] = (rho * set[k]).trace().real();
  return out;
}

/// counts[k] ~ Poisson(exposure * Tr[rho Pi_k]), drawn in projector order
/// from mt19937_64 seeded with `seed`.
inline CountRecord simulate_counts(const DensityMatrix& rho, double exposure, std::uint64_t seed) {
  if (!(exposure > 0.0) || !std::isfinite(exposure)) throw ParamOutOfRange("exposure must be positive");
  std::mt19937_64 gen(seed);
  CountRecord rec;
  rec.exposure = exposure;
  const auto probs = born_probabilities(rho.matrix());
  for (std::size_t k = 0; k < kNumProjections; ++k) {
    const double mean = exposure * std::max(probs[k], 0.0);
    if (mean <= 0.0) {
      rec.counts[k] = 0;
      continue;
    }
    std::poisson_distribution<std::uint64_t> dist(mean);
    rec.counts[k] = dist(gen);
  }
  return rec;
}

/// Expected (noise-free, real-valued) counts.
inline std::array<double, kNumProjections> expected_counts(const DensityMatrix& rho, double exposure) {
  auto probs = born_probabilities(rho.matrix());
  for (auto& p : probs) p = exposure * std::max(p, 0.0);
  return probs;
}

struct MleResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed();
  int iterations = 0;
  double log_likelihood = 0.0;
  bool converged = false;
};

namespace detail {

inline constexpr double kProbabilityFloor = 1e-15;

inline double log_likelihood(std::span<const double> counts, const Matrix4c& rho) {
  const auto probs = born_probabilities(rho);
  double ll = 0.0;
  for (std::size_t k = 0; k < kNumProjections; ++k)
    if (counts[k] > 0.0) ll += counts[k] * std::log(std::max(probs[k], kProbabilityFloor));
  return ll;
}

inline Matrix4c normalized(const Matrix4c& m) {
  const Matrix4c h = 0.5 * (m + m.adjoint());
  return h / h.trace().real();
}

}  // namespace detail

/// Iterative R rho R reconstruction from (possibly real-valued) counts.
/// When a plain step lowers the likelihood the step is diluted,
/// rho <- N[(I + eps R~) rho (I + eps R~)] with R~ = R / Tr[R rho], halving
/// eps until the likelihood increases.
inline MleResult mle_reconstruct(std::span<const double> counts, double exposure, int max_iter = 10000,
                                 double tol = 1e-12) {
  if (counts.size() != kNumProjections) throw ParamOutOfRange("mle_reconstruct expects 36 counts");
  if (!(exposure > 0.0)) throw ParamOutOfRange("exposure must be positive");
  double total = 0.0;
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ParamOutOfRange("counts must be finite and nonnegative");
    total += c;
  }
  if (!(total > 0.0)) throw ParamOutOfRange("mle_reconstruct: all counts are zero");

  const auto& set = projections();
  Matrix4c rho = Matrix4c::Identity() / 4.0;
  double ll = detail::log_likelihood(counts, rho);
  MleResult out;
  for (int it = 0; it < max_iter; ++it) {
    const auto probs = born_probabilities(rho);
    Matrix4c r = Matrix4c::Zero();
    for (std::size_t k = 0; k < kNumProjections; ++k)
      if (counts[k] > 0.0) r += counts[k] / (exposure * std::max(probs[k], detail::kProbabilityFloor)) * set[k];

    Matrix4c next = detail::normalized(r * rho * r);
    double next_ll = detail::log_likelihood(counts, next);
    if (next_ll < ll) {
      const Matrix4c r_unit = r / (r * rho).trace().real();
      for (double eps = 1.0; eps > 1e-8; eps *= 0.5) {
        const Matrix4c step = Matrix4c::Identity() + eps * r_unit;
        next = detail::normalized(step * rho * step);
        next_ll = detail::log_likelihood(counts, next);
        if (next_ll >= ll) break;
      }
    }
    out.iterations = it + 1;
    if (next_ll < ll) {
      out.converged = true;
      break;
    }
    const double gain = next_ll - ll;
    rho = next;
    ll = next_ll;
    if (gain < tol) {
      out.converged = true;
      break;
    }
  }
  out.rho = DensityMatrix::from_matrix(rho);
  out.log_likelihood = ll;
  return out;
}

inline MleResult mle_reconstruct(const CountRecord& record, int max_iter = 10000, double tol = 1e-12) {
  std::array<double, kNumProjections> c{};
  for (std::size_t k = 0; k < kNumProjections; ++k) c[k] = static_cast<double>(record.counts[k]);
  return mle_reconstruct(c, record.exposure, max_iter, tol);
}

struct PqFit {
  double p_est = 0.0;
  double q_est = 0.5;
  double fidelity = 0.0;
};

/// (p, q) maximizing fidelity(gws(p, q), rho_exp): 101 x 101 grid, then a
/// compass search refined to step 1e-5. q is reported as 0.5 when
/// p_est < 1e-3, where it is unidentifiable.
inline PqFit fit_pq(const DensityMatrix& rho_exp) {
  const ComplexMatrix root = sqrt_psd(rho_exp.matrix());
  auto fid = [&](double p, double q) { return fidelity_from_sqrt(root, gws_matrix(p, q)); };

  PqFit best{0.0, 0.5, -1.0};
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      const double p = i / 100.0, q = j / 100.0;
      const double f = fid(p, q);
      if (f > best.fidelity) best = {p, q, f};
    }

  for (double step = 0.01; step >= 1e-5;) {
    bool improved = false;
    const std::array<std::array<double, 2>, 4> moves{{{step, 0}, {-step, 0}, {0, step}, {0, -step}}};
    for (const auto& m : moves) {
      const double p = std::clamp(best.p_est + m[0], 0.0, 1.0);
      const double q = std::clamp(best.q_est + m[1], 0.0, 1.0);
      const double f = fid(p, q);
      if (f > best.fidelity + 1e-15) {
        best = {p, q, f};
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  if (best.p_est < 1e-3) best.q_est = 0.5;
  return best;
}

}  // namespace qcorr
