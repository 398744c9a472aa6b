#include <fdfm/model.hpp>
#include <fdfm/simulate.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <cmath>

using namespace fdfm;

namespace {

SimulationSpec small_spec(std::uint64_t seed, double noise = 0.1) {
  SimulationSpec s;
  s.periods = 120;
  s.maturities = 12;
  s.noise_sd = noise;
  s.seed = seed;
  return s;
}

FdfmConfig fixed(int k, double lam) {
  FdfmConfig c;
  c.factors = k;
  c.gcv_enabled = false;
  c.fixed_lambdas = std::vector<double>(k, lam);
  return c;
}

double aligned_rmse(const Eigen::VectorXd& est, const Eigen::VectorXd& truth) {
  const double s = est.dot(truth) < 0 ? -1.0 : 1.0;
  return std::sqrt((s * est - truth).squaredNorm() / est.size());
}

}  // namespace

TEST(FdfmConfig, Validation) {
  FdfmConfig c;
  c.factors = 5;
  EXPECT_THROW(c.validate(100, 5), Error);
  c.factors = 2;
  c.lambda_grid.clear();
  EXPECT_THROW(c.validate(100, 10), Error);
  c.gcv_enabled = false;
  EXPECT_NO_THROW(c.validate(100, 10));
  c.fixed_lambdas = std::vector<double>{1.0};
  EXPECT_THROW(c.validate(100, 10), Error);
}

TEST(Fit, AscentOrthonormalityAndRecovery) {
  auto sim = simulate_panel(small_spec(3));
  auto cfg = fixed(2, 10.0);
  cfg.max_iterations = 2000;  // this seed needs ~530 iterations
  auto model = fit(sim.panel, cfg);
  ASSERT_TRUE(model.diagnostics.converged);
  EXPECT_FALSE(model.diagnostics.stalled);
  for (std::size_t i = 1; i < model.fit_trace.size(); ++i)
    EXPECT_GE(model.fit_trace[i], model.fit_trace[i - 1] - 1e-8) << i;
  Eigen::MatrixXd f = model.loading_matrix();
  EXPECT_LT((f * f.transpose() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-8);
  for (int k = 0; k < 2; ++k) {
    EXPECT_LT(aligned_rmse(f.row(k).transpose(), sim.loadings.row(k).transpose()), 0.05);
    EXPECT_NEAR(model.factors[k].coefficients(0), sim.processes[k].coefficients(0), 0.15);
  }
  EXPECT_GT(model.sigma2, 0.0);
  EXPECT_NEAR(std::sqrt(model.sigma2), 0.1, 0.02);
}

TEST(Fit, NoiselessRankKPanelReconstructs) {
  auto sim = simulate_panel(small_spec(4, 0.0));
  auto model = fit(sim.panel, fixed(2, 0.0));
  EXPECT_LT((model.fitted_values() - sim.panel.data()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Fit, GcvSelectsFromGrid) {
  auto sim = simulate_panel(small_spec(5));
  FdfmConfig c;
  c.factors = 2;
  c.lambda_grid = log_spaced_grid(1e-2, 1e4, 7);
  auto model = fit(sim.panel, c);
  for (double lam : model.lambdas)
    EXPECT_NE(std::find(c.lambda_grid.begin(), c.lambda_grid.end(), lam), c.lambda_grid.end());
}

TEST(Fit, SelfConsistencyOnModelGeneratedData) {
  // the rotation inside the loading span is pinned only by the AR dynamics and
  // EM crawls along it at tiny noise, so the refit is aligned by Procrustes
  auto sim = simulate_panel(small_spec(5));
  auto model = fit(sim.panel, fixed(2, 1.0));
  ASSERT_TRUE(model.diagnostics.converged);
  CurvePanel again = simulate_from_model(model, 150, 1e-3, 11);
  auto refit = fit(again, fixed(2, 1.0));
  Eigen::MatrixXd a = model.loading_matrix(), b = refit.loading_matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b * a.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd rot = svd.matrixV() * svd.matrixU().transpose();
  EXPECT_LT(std::sqrt((rot * b - a).squaredNorm() / a.size()), 1e-2);
}

TEST(Fit, QuadratureInnerProduct) {
  auto sim = simulate_panel(small_spec(7));
  auto c = fixed(2, 1.0);
  c.inner_product = InnerProduct::Quadrature;
  auto model = fit(sim.panel, c);
  Eigen::VectorXd w = quadrature_weights(sim.panel.grid());
  Eigen::MatrixXd f = model.loading_matrix();
  EXPECT_LT((f * w.asDiagonal() * f.transpose() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(),
            1e-8);
}

TEST(Fit, WithRegressors) {
  auto sim = simulate_panel(small_spec(8));
  auto c = fixed(2, 1.0);
  Eigen::MatrixXd a(130, 2);
  for (int i = 0; i < 130; ++i) a.row(i) << 1.0, i / 100.0;
  c.regressors = RegressorPanel{a};
  auto model = fit(sim.panel, c);
  ASSERT_TRUE(model.factors[0].has_regressors());
  for (std::size_t i = 1; i < model.fit_trace.size(); ++i)
    EXPECT_GE(model.fit_trace[i], model.fit_trace[i - 1] - 1e-8);
  Eigen::MatrixXd future = a.bottomRows(10);
  auto fc = forecast_curve(model, 3, {5.0, 50.0}, &future);
  EXPECT_TRUE(fc.values.allFinite());
  EXPECT_THROW(forecast_curve(model, 3, {5.0}), Error);
}

TEST(Forecast, KnotConsistencyAndSplineOffKnot) {
  auto sim = simulate_panel(small_spec(9));
  auto model = fit(sim.panel, fixed(2, 1.0));
  const auto& knots = model.grid.knots();
  auto at_knots = forecast_curve(model, 2, knots);
  Eigen::VectorXd beta = forecast_scores(model, 2);
  Eigen::VectorXd want = model.loading_matrix().transpose() * beta;
  EXPECT_LT((at_knots.values - want).cwiseAbs().maxCoeff(), 1e-12);
  auto through = oracle::natural_cubic(knots, at_knots.values);
  std::vector<double> off{knots[0] + 0.3, 0.5 * (knots[4] + knots[5]), knots.back() + 6};
  auto fc = forecast_curve(model, 2, off);
  for (std::size_t j = 0; j < off.size(); ++j)
    EXPECT_NEAR(fc.values(j), through.value(off[j]), 1e-9);
  EXPECT_FALSE(fc.extrapolated[0]);
  EXPECT_TRUE(fc.extrapolated[2]);
}

TEST(Forecast, WhiteNoiseFactorGivesMeanTimesLoading) {
  KnotGrid g({1, 2, 4, 8});
  FdfmParameters p;
  p.loadings = Eigen::RowVector4d(0.1, 0.5, 0.7, 0.5).normalized();
  ArProcess proc;
  proc.coefficients = Eigen::VectorXd::Zero(1);
  proc.intercept = 2.5;
  p.factors = {proc};
  p.sigma2 = 0.1;
  p.lambdas = {0.0};
  auto model = make_model(g, p, Eigen::MatrixXd::Constant(10, 1, -4.0));
  auto fc = forecast_curve(model, 1, {1.5, 3.0, 8.0});
  for (int j = 0; j < 3; ++j)
    EXPECT_NEAR(fc.values(j), 2.5 * evaluate(model.loadings[0], std::vector{1.5, 3.0, 8.0}[j]),
                1e-14);
}

TEST(Synthesize, KnotsAndAffineMidpoint) {
  auto sim = simulate_panel(small_spec(10));
  auto model = fit(sim.panel, fixed(2, 1.0));
  Eigen::MatrixXd fitted = model.fitted_values();
  for (int j : {0, 5, 11}) {
    auto s = synthesize_series(model, model.grid.knot(j));
    EXPECT_LT((s.values - fitted.col(j)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_FALSE(s.extrapolated);
  }
  EXPECT_TRUE(synthesize_series(model, 200.0).extrapolated);

  KnotGrid g({1, 2, 3, 4});
  FdfmParameters p;
  p.loadings = Eigen::RowVector4d(1, 2, 3, 4).normalized();
  ArProcess proc;
  proc.coefficients = Eigen::VectorXd::Zero(1);
  p.factors = {proc};
  p.lambdas = {0.0};
  auto affine = make_model(g, p, Eigen::VectorXd::LinSpaced(6, -1, 2));
  Eigen::VectorXd mid = synthesize_series(affine, 2.5).values;
  Eigen::VectorXd avg = 0.5 * (synthesize_series(affine, 2.0).values +
                               synthesize_series(affine, 3.0).values);
  EXPECT_LT((mid - avg).cwiseAbs().maxCoeff(), 1e-14);
}
