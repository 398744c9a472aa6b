#include <fdfm/errors.hpp>
#include <fdfm/spline.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <random>

using namespace fdfm;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no fdfm::Error thrown";
  return ErrorCode::Usage;
}

}  // namespace

TEST(KnotGrid, RejectsBadKnots) {
  EXPECT_EQ(code_of([] { KnotGrid({1.0, 2.0}); }), ErrorCode::TooFewKnots);
  EXPECT_EQ(code_of([] { KnotGrid({1.0, 3.0, 2.0}); }), ErrorCode::InvalidGrid);
  EXPECT_EQ(code_of([] { KnotGrid({1.0, 1.0, 2.0}); }), ErrorCode::InvalidGrid);
}

TEST(Penalty, EqualSpacingStructure) {
  PenaltyOperator pen(KnotGrid({0, 1, 2, 3, 4, 5}));
  for (int c = 0; c < 4; ++c) {
    EXPECT_DOUBLE_EQ(pen.q()(c, c), 1.0);
    EXPECT_DOUBLE_EQ(pen.q()(c + 1, c), -2.0);
    EXPECT_DOUBLE_EQ(pen.q()(c + 2, c), 1.0);
    EXPECT_DOUBLE_EQ(pen.r()(c, c), 2.0 / 3);
    if (c < 3) EXPECT_DOUBLE_EQ(pen.r()(c, c + 1), 1.0 / 6);
  }
}

TEST(Penalty, MatchesExactIntegrationOracle) {
  for (auto knots : {oracle::even_knots(9, 0, 8), oracle::even_knots(12, 1, 120),
                     std::vector<double>{1.5, 3, 6, 9, 12, 15, 18, 21, 24, 30, 36, 48, 60, 120}}) {
    PenaltyOperator pen{KnotGrid(knots)};
    Eigen::MatrixXd ref = oracle::roughness_matrix(knots);
    EXPECT_LT((pen.omega() - ref).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, ref.norm()));
  }
}

TEST(Penalty, AnnihilatesAffineAndHasRankMMinus2) {
  std::mt19937_64 rng(3);
  for (int m : {3, 5, 17}) {
    auto knots = oracle::random_knots(m, rng);
    PenaltyOperator pen{KnotGrid(knots)};
    Eigen::VectorXd v(m);
    for (int j = 0; j < m; ++j) v(j) = 2.5 * knots[j] - 7;
    EXPECT_LT((pen.omega() * v).norm(), 1e-10 * v.norm());
    EXPECT_EQ(pen.null_space_dimension(), 2u);
    Eigen::MatrixXd rebuilt = pen.eigenvectors() * pen.eigenvalues().asDiagonal() *
                              pen.eigenvectors().transpose();
    EXPECT_LT((rebuilt - pen.omega()).cwiseAbs().maxCoeff(), 1e-10 * pen.omega().norm());
  }
}

TEST(Spline, HandSolvedThreeKnots) {
  KnotGrid g({0, 1, 2});
  auto s = complete_spline(Eigen::Vector3d(0, 1, 0), g);
  EXPECT_NEAR(s.second_derivatives()(1), -3.0, 1e-14);
  EXPECT_EQ(s.second_derivatives()(0), 0.0);
  EXPECT_EQ(s.second_derivatives()(2), 0.0);
  EXPECT_NEAR(evaluate(s, 0.5), 0.6875, 1e-14);
  auto ref = oracle::natural_cubic({0, 1, 2}, Eigen::Vector3d(0, 1, 0));
  for (double t = -1; t <= 3; t += 0.05) EXPECT_NEAR(evaluate(s, t), ref.value(t), 1e-12) << t;
}

TEST(Spline, AffineValuesGiveZeroCurvature) {
  std::mt19937_64 rng(5);
  auto knots = oracle::random_knots(8, rng);
  KnotGrid g(knots);
  Eigen::VectorXd v(8);
  for (int j = 0; j < 8; ++j) v(j) = 0.3 * knots[j] + 1;
  auto s = complete_spline(v, g);
  EXPECT_LT(s.second_derivatives().cwiseAbs().maxCoeff(), 1e-12);
  for (double t : {knots[0] - 5, 0.5 * (knots[2] + knots[3]), knots[7] + 10})
    EXPECT_NEAR(evaluate(s, t), 0.3 * t + 1, 1e-10);
  EXPECT_NEAR(roughness(s, build_penalty(g)), 0.0, 1e-12);
}

TEST(Spline, InterpolatesAndMatchesDenseOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 10; ++rep) {
    const int m = 4 + rep;
    auto knots = oracle::random_knots(m, rng);
    Eigen::VectorXd v(m);
    for (auto& x : v) x = z(rng);
    auto s = complete_spline(v, KnotGrid(knots));
    auto ref = oracle::natural_cubic(knots, v);
    for (int j = 0; j < m; ++j) EXPECT_NEAR(evaluate(s, knots[j]), v(j), 1e-10);
    for (double t = knots.front() - 3; t < knots.back() + 3; t += 0.37)
      EXPECT_NEAR(evaluate(s, t), ref.value(t), 1e-9 * (1 + std::abs(ref.value(t))));
    for (int j = 0; j < m; ++j)
      EXPECT_NEAR(s.second_derivatives()(j), ref.second_derivative(knots[j]), 1e-9);
  }
}

TEST(Spline, RoughnessAgreesWithQuadratureAndScalesQuadratically) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> z;
  auto knots = oracle::random_knots(10, rng);
  KnotGrid g(knots);
  auto pen = build_penalty(g);
  Eigen::VectorXd v(10);
  for (auto& x : v) x = z(rng);
  auto s = complete_spline(v, g);
  const double r = roughness(s, pen);
  const double q = oracle::roughness_by_quadrature([&](double t) { return evaluate(s, t); }, knots);
  EXPECT_NEAR(r, q, 1e-6 * r);
  EXPECT_NEAR(r, oracle::natural_cubic(knots, v).roughness(), 1e-10 * r);
  auto s3 = complete_spline(3 * v, g);
  EXPECT_NEAR(roughness(s3, pen), 9 * r, 1e-10 * r);
}

TEST(Spline, DimensionErrors) {
  KnotGrid g({0, 1, 2, 3});
  EXPECT_EQ(code_of([&] { complete_spline(Eigen::Vector3d(1, 2, 3), g); }), ErrorCode::Dimension);
  auto s = complete_spline(Eigen::Vector3d(1, 2, 3), KnotGrid({0, 1, 2}));
  EXPECT_EQ(code_of([&] { roughness(s, build_penalty(g)); }), ErrorCode::Dimension);
}

TEST(Tridiagonal, SolvesAgainstDense) {
  Eigen::VectorXd lo(3), di(4), up(3), b(4);
  lo << 1, 2, 3;
  di << 5, 6, 7, 8;
  up << 0.5, 0.25, 1;
  b << 1, -1, 2, 0.5;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a.diagonal() = di;
  for (int i = 0; i < 3; ++i) {
    a(i + 1, i) = lo(i);
    a(i, i + 1) = up(i);
  }
  EXPECT_LT((solve_tridiagonal(lo, di, up, b) - a.fullPivLu().solve(b)).norm(), 1e-13);
}
