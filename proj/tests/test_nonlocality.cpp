#include <gtest/gtest.h>

#include <numbers>

#include "qcorr/entanglement.hpp"
#include "qcorr/nonlocality.hpp"
#include "support.hpp"

using namespace qcorr;
using namespace qcorr::testing;

namespace {

// Brute-force CHSH oracle: max over unit vectors a, a', b, b' of
// <B_CHSH> = a.T(b + b') + a'.T(b - b'). For fixed b, b' the best a, a' are
// the normalized T(b + b') and T(b - b'), so only b, b' are gridded; the
// result is refined by coordinate ascent on the sphere angles.
double chsh_oracle(const Matrix3r& t) {
  auto unit = [](double th, double ph) {
    return Vector3r(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
  };
  auto value = [&](const std::array<double, 4>& x) {
    const Vector3r b = unit(x[0], x[1]), b2 = unit(x[2], x[3]);
    return (t * (b + b2)).norm() + (t * (b - b2)).norm();
  };
  const int n = 16;
  std::array<double, 4> best_x{};
  double best = -1.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < 2 * n; ++j)
      for (int k = 0; k <= n; ++k)
        for (int l = 0; l < 2 * n; ++l) {
          const std::array<double, 4> x{std::numbers::pi * i / n, std::numbers::pi * j / n, std::numbers::pi * k / n,
                                         std::numbers::pi * l / n};
          const double v = value(x);
          if (v > best) {
            best = v;
            best_x = x;
          }
        }
  for (double step = std::numbers::pi / n; step > 1e-9; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (int d = 0; d < 4; ++d)
        for (double s : {step, -step}) {
          auto x = best_x;
          x[d] += s;
          const double v = value(x);
          if (v > best + 1e-15) {
            best = v;
            best_x = x;
            moved = true;
          }
        }
    }
  }
  return best;
}

}  // namespace

TEST(HorodeckiM, Examples) {
  EXPECT_NEAR(horodecki_m(DensityMatrix::maximally_mixed()), 0.0, 1e-15);
  for (double p : {0.0, 0.3, 0.7071, 1.0}) EXPECT_NEAR(horodecki_m(werner(p)), 2 * p * p, 1e-12);
  EXPECT_NEAR(horodecki_m(gws({1.0, 0.5})), 2.0, 1e-12);
}

TEST(HorodeckiM, MatchesBruteForceChsh) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 12; ++trial) {
    const auto rho = random_state(gen, 1 + trial % 4);
    const double chsh = chsh_oracle(bloch_decompose(rho).t);
    // max <B_CHSH> = 2 sqrt(M).
    EXPECT_NEAR(chsh, 2.0 * std::sqrt(horodecki_m(rho)), 1e-6) << trial;
  }
  const double chsh = chsh_oracle(bloch_decompose(gws({0.9, 0.1})).t);
  EXPECT_NEAR(chsh, 2.0 * std::sqrt(horodecki_m(gws({0.9, 0.1}))), 1e-6);
}

TEST(BellB, Examples) {
  EXPECT_NEAR(bell_b(werner(1.0 / std::sqrt(2.0))), 0.0, 1e-7);
  EXPECT_NEAR(bell_b(werner(1.0)), 1.0, 1e-12);
  EXPECT_NEAR(bell_b(gws({1.0, 0.1})), 0.6, 1e-12);
  EXPECT_NEAR(bell_b(gws({1.0, 0.1})), negativity(gws({1.0, 0.1})), 1e-10);
}

TEST(BellBClosed, Examples) {
  EXPECT_NEAR(bell_b_gws_closed({1.0 / std::sqrt(2.0), 0.5}), 0.0, 1e-7);
  EXPECT_NEAR(bell_b_gws_closed({1.0, 0.5}), 1.0, 1e-15);
  EXPECT_NEAR(bell_b_gws_closed({0.9, 0.1}), std::sqrt(0.81 * 1.36 - 1.0), 1e-14);
  EXPECT_NEAR(bell_b_gws_closed({0.9, 0.1}), 0.3187, 1e-4);
}

TEST(ThresholdPB, Examples) {
  EXPECT_NEAR(threshold_p_b(0.5), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(threshold_p_b(0.1), 1.0 / std::sqrt(1.36), 1e-15);
  EXPECT_NEAR(threshold_p_b(0.1), 0.8575, 1e-4);
  EXPECT_NEAR(threshold_p_b(0.0), 1.0, 1e-15);
}

TEST(GwsFamily, ClosedFormOnGrid) {
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      const GwsParams g{i / 49.0, j / 49.0};
      ASSERT_NEAR(bell_b(gws(g)), bell_b_gws_closed(g), 1e-8) << g.p << "," << g.q;
    }
}

TEST(GwsFamily, PureStatesBEqualsNAndC) {
  for (int j = 0; j <= 40; ++j) {
    const auto rho = gws({1.0, j / 40.0});
    EXPECT_NEAR(bell_b(rho), negativity(rho), 1e-8);
    EXPECT_NEAR(bell_b(rho), concurrence(rho), 1e-8);
  }
}

TEST(BellB, LocalUnitaryInvarianceAndBounds) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rho = trial % 2 ? random_state(gen, 1 + trial % 4) : gws({0.7 + 0.003 * (trial % 100), 0.2});
    const auto rotated = local_rotate(rho, random_unitary(gen, 2), random_unitary(gen, 2));
    EXPECT_NEAR(bell_b(rho), bell_b(rotated), 1e-8);
    EXPECT_LE(horodecki_m(rho), 2.0 + 1e-12);
    EXPECT_LE(bell_b(rho), 1.0 + 1e-12);
  }
}
