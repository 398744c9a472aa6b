#pragma once

// Univariate AR(p) processes: conditional least-squares fits (plain data or
// posterior moments), feasible GLS with regressors, forecasting, stationarity
// and the stationary autocovariance used to build factor priors.

#include <Eigen/Dense>

#include "fdfm/errors.hpp"

#include <optional>
#include <string>

namespace fdfm {

struct ArProcess {
  int order = 1;
  Eigen::VectorXd coefficients;  // phi_1..phi_p
  double intercept = 0.0;        // c; unused when regressor_coefficients is set
  double innovation_variance = 1.0;
  std::optional<Eigen::VectorXd> regressor_coefficients;  // mu, length d

  bool has_regressors() const noexcept { return regressor_coefficients.has_value(); }
  double coefficient_sum() const { return coefficients.sum(); }
  /// c / (1 - sum phi); only meaningful without regressors.
  double mean() const;
};

/// Per-time regressor rows A_i (n x d).
struct RegressorPanel {
  Eigen::MatrixXd rows;

  Eigen::Index periods() const noexcept { return rows.rows(); }
  Eigen::Index dimension() const noexcept { return rows.cols(); }
};

/// First and second moments of a latent series. An empty covariance means a
/// point mass, i.e. observed data.
struct SeriesMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  double second(Eigen::Index a, Eigen::Index b) const {
    return (covariance.size() ? covariance(a, b) : 0.0) + mean(a) * mean(b);
  }
  Eigen::Index size() const noexcept { return mean.size(); }
};

class FglsConvergenceError : public Error {
 public:
  FglsConvergenceError(const std::string& what, ArProcess last)
      : Error(ErrorCode::ConvergenceFailure, what), last_(std::move(last)) {}
  const ArProcess& last_iterate() const noexcept { return last_; }

 private:
  ArProcess last_;
};

struct FglsOptions {
  double tolerance = 1e-8;
  int max_iterations = 50;
};

/// Conditional least squares on `series[p..n)` against an intercept and p lags.
ArProcess fit_ols(const Eigen::VectorXd& series, int p);
/// Same normal equations with every product replaced by its expectation.
ArProcess fit_ols(const SeriesMoments& moments, int p);

/// Alternates GLS for mu given phi and least squares for phi given mu.
/// Throws ConvergenceFailure (see FglsConvergenceError) after max_iterations.
ArProcess fit_fgls(const Eigen::VectorXd& series, const RegressorPanel& regressors, int p,
                   const FglsOptions& options = {});
ArProcess fit_fgls(const SeriesMoments& moments, const RegressorPanel& regressors, int p,
                   const FglsOptions& options = {});

/// `history` is chronological and must hold at least p values.
Eigen::VectorXd forecast(const ArProcess& proc, const Eigen::VectorXd& history, int horizon);
/// Regression-in-deviations forecast: history_regressors aligns with history,
/// future_regressors supplies the next `horizon` rows.
Eigen::VectorXd forecast(const ArProcess& proc, const Eigen::VectorXd& history,
                         const Eigen::MatrixXd& history_regressors,
                         const Eigen::MatrixXd& future_regressors, int horizon);

struct UnconditionalMoments {
  double mean = 0.0;
  Eigen::MatrixXd autocovariance;  // n x n Toeplitz
};

/// Autocovariances gamma(0..max_lag) from the Yule-Walker relations.
Eigen::VectorXd autocovariances(const ArProcess& proc, Eigen::Index max_lag);
/// Throws NonStationary for explosive or unit-root coefficients.
UnconditionalMoments unconditional_moments(const ArProcess& proc, Eigen::Index n);
/// Mean path A_i mu with regressors, else the constant c / (1 - sum phi).
Eigen::VectorXd mean_path(const ArProcess& proc, Eigen::Index n,
                          const RegressorPanel* regressors = nullptr);

/// Largest modulus of the companion-matrix eigenvalues (reciprocal of the
/// smallest characteristic-root modulus).
double spectral_radius(const ArProcess& proc);
bool is_stationary(const ArProcess& proc);
/// Scales phi_r by s^r with s = target / spectral_radius, so the companion
/// eigenvalues move radially inwards. Returns the input if already inside.
ArProcess shrink_to_stationary(const ArProcess& proc, double target = 0.99);

}  // namespace fdfm
