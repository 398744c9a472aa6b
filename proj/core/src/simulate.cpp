#include "fdfm/simulate.hpp"

#include "fdfm/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace fdfm {

KnotGrid simulation_grid(const SimulationSpec& spec) {
  if (spec.maturities < 3) throw Error(ErrorCode::TooFewKnots, "need at least three maturities");
  std::vector<double> knots(spec.maturities);
  for (Eigen::Index j = 0; j < spec.maturities; ++j)
    knots[j] = spec.first_maturity +
               (spec.last_maturity - spec.first_maturity) * j / (spec.maturities - 1.0);
  return KnotGrid(knots);
}

Eigen::MatrixXd sinusoidal_loadings(const KnotGrid& grid, int factors) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (factors < 1 || factors >= m) throw Error(ErrorCode::Dimension, "bad factor count");
  Eigen::MatrixXd raw(m, factors);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double u = (grid.knot(j) - grid.front()) / (grid.back() - grid.front());
    for (int k = 0; k < factors; ++k)
      raw(j, k) = std::sin((k + 1) * std::numbers::pi * u / 1.5 + std::numbers::pi / 6.0);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, factors);
  for (int k = 0; k < factors; ++k) {
    Eigen::Index arg = 0;
    q.col(k).cwiseAbs().maxCoeff(&arg);
    if (q(arg, k) < 0.0) q.col(k) *= -1.0;
  }
  return q.transpose();
}

namespace {

Eigen::MatrixXd simulate_scores(const std::vector<ArProcess>& procs, Eigen::Index n, int burn_in,
                                std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  const auto K = static_cast<Eigen::Index>(procs.size());
  Eigen::MatrixXd out(n, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& p = procs[k];
    const double mu = p.mean();
    const double sd = std::sqrt(p.innovation_variance);
    std::vector<double> path(static_cast<std::size_t>(burn_in + n), mu);
    for (std::size_t i = static_cast<std::size_t>(p.order); i < path.size(); ++i) {
      double v = p.intercept;
      for (int r = 1; r <= p.order; ++r) v += p.coefficients(r - 1) * path[i - r];
      path[i] = v + sd * z(rng);
    }
    for (Eigen::Index i = 0; i < n; ++i) out(i, k) = path[burn_in + i];
  }
  return out;
}

}  // namespace

SimulatedPanel simulate_panel(const SimulationSpec& spec) {
  const int K = spec.factors;
  if (K < 1) throw Error(ErrorCode::Config, "simulation needs at least one factor");
  if (static_cast<int>(spec.phi.size()) != K || static_cast<int>(spec.innovation_sd.size()) != K)
    throw Error(ErrorCode::Config, "phi and innovation_sd need one value per factor");
  if (!spec.means.empty() && static_cast<int>(spec.means.size()) != K)
    throw Error(ErrorCode::Config, "means need one value per factor");
  if (spec.periods < 1 || spec.burn_in < 0 || !(spec.noise_sd >= 0.0))
    throw Error(ErrorCode::Config, "invalid simulation sizes");
  const auto grid = simulation_grid(spec);
  std::vector<ArProcess> procs;
  for (int k = 0; k < K; ++k) {
    ArProcess p;
    p.order = 1;
    p.coefficients = Eigen::VectorXd::Constant(1, spec.phi[k]);
    const double mean = spec.means.empty() ? 0.0 : spec.means[k];
    p.intercept = mean * (1.0 - spec.phi[k]);
    p.innovation_variance = spec.innovation_sd[k] * spec.innovation_sd[k];
    if (!is_stationary(p)) throw Error(ErrorCode::NonStationary, "simulation AR must be stationary");
    procs.push_back(p);
  }
  std::mt19937_64 rng(spec.seed);
  const Eigen::MatrixXd f = sinusoidal_loadings(grid, K);
  const Eigen::MatrixXd b = simulate_scores(procs, spec.periods, spec.burn_in, rng);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x = b * f;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) += spec.noise_sd * z(rng);
  return SimulatedPanel{CurvePanel(std::move(x), grid), f, b, std::move(procs)};
}

CurvePanel simulate_from_model(const FdfmModel& model, Eigen::Index periods, double noise_sd,
                               std::uint64_t seed, int burn_in) {
  for (const auto& p : model.factors)
    if (p.has_regressors()) throw Error(ErrorCode::Config, "cannot simulate regressor-driven factors");
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd b = simulate_scores(model.factors, periods, burn_in, rng);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x = b * model.loading_matrix();
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) += noise_sd * z(rng);
  return CurvePanel(std::move(x), model.grid);
}

}  // namespace fdfm
