#include <gtest/gtest.h>

#include "qcorr/entanglement.hpp"
#include "qcorr/nonlocality.hpp"
#include "qcorr/states.hpp"
#include "support.hpp"

using namespace qcorr;
using namespace qcorr::testing;

TEST(Gws, Examples) {
  for (double q : {0.0, 0.1, 0.5, 1.0}) EXPECT_LT(max_abs(gws({0.0, q}).matrix() - Matrix4c::Identity() / 4.0), 1e-15);
  const auto bell = DensityMatrix::pure(phi_plus());
  EXPECT_LT(max_abs(gws({1.0, 0.5}).matrix() - bell.matrix()), 1e-15);
  Matrix4c expected = Matrix4c::Zero();
  expected(0, 0) = 0.9;
  expected(3, 3) = 0.1;
  expected(0, 3) = expected(3, 0) = 0.3;
  EXPECT_LT(max_abs(gws({1.0, 0.1}).matrix() - expected), 1e-15);
}

TEST(Gws, RejectsOutOfRange) {
  EXPECT_THROW(gws({1.1, 0.5}), ParamOutOfRange);
  EXPECT_THROW(gws({-0.1, 0.5}), ParamOutOfRange);
  EXPECT_THROW(gws({0.5, 1.5}), ParamOutOfRange);
  EXPECT_THROW(gws({std::nan(""), 0.5}), ParamOutOfRange);
  EXPECT_THROW(werner(2.0), ParamOutOfRange);
}

TEST(Werner, MatchesGwsAtHalf) {
  EXPECT_LT(max_abs(werner(0.0).matrix() - Matrix4c::Identity() / 4.0), 1e-15);
  EXPECT_LT(max_abs(werner(1.0).matrix() - DensityMatrix::pure(phi_plus()).matrix()), 1e-15);
  for (int i = 0; i <= 20; ++i) {
    const double p = i / 20.0;
    EXPECT_EQ(werner(p).matrix(), gws({p, 0.5}).matrix());
  }
  EXPECT_NEAR(negativity(werner(1.0 / 3.0)), 0.0, 1e-12);
}

TEST(Mix, Examples) {
  const auto rho = gws({0.4, 0.3});
  EXPECT_LT(max_abs(mix(rho, rho, 0.5).matrix() - rho.matrix()), 1e-15);
  EXPECT_LT(max_abs(mix(gws({0.8, 0.1}), gws({0.9, 0.1}), 0.5).matrix() - gws({0.85, 0.1}).matrix()), 1e-10);
  const auto bell = DensityMatrix::pure(phi_plus());
  for (double p : {0.0, 0.25, 0.6, 1.0})
    EXPECT_LT(max_abs(mix(DensityMatrix::maximally_mixed(), bell, 1.0 - p).matrix() - werner(p).matrix()), 1e-15);
  EXPECT_THROW(mix(rho, rho, 1.2), ParamOutOfRange);
}

TEST(Mix, SharedQLinearityAndAssociativity) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 100; ++trial) {
    const double p1 = u(gen), p2 = u(gen), p3 = u(gen), q = u(gen), w = u(gen), v = u(gen);
    const auto mixed = mix(gws({p1, q}), gws({p2, q}), w);
    EXPECT_LT(max_abs(mixed.matrix() - gws({w * p1 + (1 - w) * p2, q}).matrix()), 1e-10);
    // ((a w b) v c) == a (wv) (b (v(1-w)/(1-wv)) c) rearranged with matching total weights.
    const auto a = random_state(gen), b = random_state(gen), c = random_state(gen);
    const auto left = mix(mix(a, b, w), c, v);
    const double wa = w * v;
    if (wa < 1.0 - 1e-9) {
      const auto right = mix(a, mix(b, c, (1 - w) * v / (1 - wa)), wa);
      EXPECT_LT(max_abs(left.matrix() - right.matrix()), 1e-10);
    }
    (void)p3;
  }
}

TEST(Bloch, Examples) {
  const auto b0 = bloch_decompose(DensityMatrix::maximally_mixed());
  EXPECT_LT(b0.x.norm() + b0.y.norm() + b0.t.norm(), 1e-15);
  for (double p : {0.0, 0.3, 0.8, 1.0}) {
    const auto b = bloch_decompose(werner(p));
    EXPECT_LT(b.x.norm() + b.y.norm(), 1e-15);
    EXPECT_LT((b.t - Eigen::Vector3d(p, -p, p).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-14);
  }
  const auto b = bloch_decompose(gws({1.0, 0.1}));
  EXPECT_LT((b.x - Vector3r(0, 0, 0.8)).norm(), 1e-14);
  EXPECT_LT((b.y - Vector3r(0, 0, 0.8)).norm(), 1e-14);
  EXPECT_LT((b.t - Eigen::Vector3d(0.6, -0.6, 1.0).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Bloch, RoundTripAndBounds) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 300; ++trial) {
    const auto rho = random_state(gen, 1 + trial % 4);
    const auto b = bloch_decompose(rho);
    EXPECT_LE(b.x.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
    EXPECT_LE(b.y.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
    EXPECT_LE(b.t.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
    EXPECT_LT(max_abs(bloch_reassemble(b) - rho.matrix()), 1e-9);
  }
}

TEST(XState, Examples) {
  XStateParams s;
  EXPECT_LT(max_abs(x_state(s).matrix() - Matrix4c::Identity() / 4.0), 1e-15);
  for (double p : {0.0, 0.3, 0.85, 1.0})
    for (double q : {0.0, 0.1, 0.5, 0.77}) {
      const auto xs = gws_x_params({p, q});
      EXPECT_NEAR(xs.a, p * (1 - q) + (1 - p) / 4, 1e-15);
      EXPECT_NEAR(xs.d, p * q + (1 - p) / 4, 1e-15);
      EXPECT_LT(max_abs(x_state(xs).matrix() - gws({p, q}).matrix()), 1e-15);
    }
  XStateParams edge{0.4, 0.1, 0.1, 0.4, Complex(0.0, 0.4), Complex(0.1, 0.0)};
  EXPECT_NEAR(eig_hermitian(x_state(edge).matrix()).values(0), 0.0, 1e-10);
  XStateParams bad{0.4, 0.1, 0.1, 0.4, Complex(0.45, 0.0), Complex(0.0, 0.0)};
  EXPECT_THROW(x_state(bad), NotPositiveSemidefinite);
  XStateParams bad_trace{0.5, 0.5, 0.5, 0.5, Complex(0.0, 0.0), Complex(0.0, 0.0)};
  EXPECT_THROW(x_state(bad_trace), InvalidState);
}

TEST(SetupRatios, Examples) {
  for (double p : {0.0, 0.2, 0.7, 0.99}) EXPECT_NEAR(setup_ratios({p, 0.5}).r_ad, 1.0, 1e-15);
  for (double q : {0.1, 0.5, 0.9}) {
    const auto r = setup_ratios({0.0, q});
    EXPECT_NEAR(r.r_ad, 1.0, 1e-15);
    EXPECT_NEAR(r.visibility, 0.0, 1e-15);
    EXPECT_NEAR(r.r_ab, 1.0, 1e-15);
  }
  EXPECT_NEAR(setup_ratios({0.8, 0.1}).r_ad, 0.52 / 3.08, 1e-14);
  EXPECT_THROW(setup_ratios({1.0, 0.3}), DivisionByZero);
}

TEST(Symmetry, QAndOneMinusQRelatedByLocalFlip) {
  const Matrix4c xx = kron(pauli::x(), pauli::x());
  for (double p : {0.2, 0.6, 0.95})
    for (double q : {0.05, 0.2, 0.4}) {
      const Matrix4c flipped = xx * gws({p, q}).matrix() * xx;
      EXPECT_LT(max_abs(flipped - gws({p, 1 - q}).matrix()), 1e-15);
      EXPECT_NEAR(negativity(gws({p, q})), negativity(gws({p, 1 - q})), 1e-8);
      EXPECT_NEAR(concurrence(gws({p, q})), concurrence(gws({p, 1 - q})), 1e-8);
      EXPECT_NEAR(bell_b(gws({p, q})), bell_b(gws({p, 1 - q})), 1e-8);
    }
}
