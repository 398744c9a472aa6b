#pragma once

// Functional dynamic factor model: X = B F + noise with K natural-cubic-spline
// loading curves (rows of F, orthonormal on the knots) and independent AR(p)
// factor scores (columns of B). Estimated by penalized-likelihood EM.

#include "fdfm/artime.hpp"
#include "fdfm/panel.hpp"
#include "fdfm/spline.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace fdfm {

enum class InnerProduct {
  Discrete,    // f_k' f_l on the knot values
  Quadrature,  // trapezoid-weighted, applied once after convergence
};

/// `count` log-spaced points from lo to hi inclusive.
std::vector<double> log_spaced_grid(double lo, double hi, int count);
/// 25 points on [1e-4, 1e6].
std::vector<double> default_lambda_grid();

struct FdfmConfig {
  int factors = 3;
  int ar_order = 1;
  std::vector<double> lambda_grid = default_lambda_grid();
  double em_tolerance = 1e-6;
  int max_iterations = 500;
  bool gcv_enabled = true;
  /// Per-factor smoothing parameters; used when GCV is off. With GCV off and
  /// no fixed values every loading is unpenalized.
  std::optional<std::vector<double>> fixed_lambdas;
  std::optional<RegressorPanel> regressors;
  InnerProduct inner_product = InnerProduct::Discrete;

  /// Throws Config on inconsistent settings for an n x m panel.
  void validate(Eigen::Index n, Eigen::Index m) const;
};

/// The estimation state: discrete loadings (K x m), factor processes, noise
/// variance and smoothing parameters.
struct FdfmParameters {
  Eigen::MatrixXd loadings;
  std::vector<ArProcess> factors;
  double sigma2 = 1.0;
  std::vector<double> lambdas;

  int factor_count() const noexcept { return static_cast<int>(loadings.rows()); }
};

struct PosteriorMoments {
  Eigen::MatrixXd mean;                     // n x K, column k = E[beta_k | X]
  std::vector<Eigen::MatrixXd> cov_blocks;  // Var[beta_k | X], n x n each
  double log_likelihood = 0.0;              // log p(X) under the parameters used

  Eigen::Index periods() const noexcept { return mean.rows(); }
  int factor_count() const noexcept { return static_cast<int>(mean.cols()); }
  /// vec(B): factor 1 scores first.
  Eigen::VectorXd stacked_mean() const;
  /// E[beta_k beta_h' | X]; cross-factor covariance is zero.
  Eigen::MatrixXd second_moment(int k, int h) const;
  /// E[||beta_k||^2 | X] = tr(cov_k) + ||mean_k||^2.
  double expected_squared_norm(int k) const;
  SeriesMoments factor_moments(int k) const;
};

struct SvdInit {
  Eigen::MatrixXd scores;    // n x K, left singular vectors times singular values
  Eigen::MatrixXd loadings;  // K x m, right singular vectors
  Eigen::VectorXd singular_values;
};

/// Step 0. Throws RankDeficiency when the K-th singular value vanishes.
SvdInit initialize_svd(const CurvePanel& panel, int factors);

/// Sherman-Morrison-Woodbury form of Var[vec X]^{-1} for orthonormal loadings:
///   s^-2 I - s^-4 (F' x I_n) [s^-2 I_nK + Sigma_beta^-1]^{-1} (F x I_n).
/// Only the K inner n x n blocks are factorized.
class WoodburyInverse {
 public:
  WoodburyInverse(const Eigen::MatrixXd& loadings, const std::vector<Eigen::MatrixXd>& factor_covs,
                  double sigma2);

  /// Sigma_X^{-1} vec(residual), returned as an n x m matrix.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& residual) const;
  /// (F x I_n) Sigma_X^{-1} vec(residual) as n x K. Block k reduces to
  /// (Sigma_k + s^2 I)^{-1} residual f_k.
  Eigen::MatrixXd project_apply(const Eigen::MatrixXd& residual) const;
  /// [s^-2 I + Sigma_k^{-1}]^{-1}.
  Eigen::MatrixXd inner_block(int k) const;
  /// (Sigma_k + s^2 I)^{-1}.
  Eigen::MatrixXd shifted_inverse(int k) const;
  /// log det Sigma_X.
  double log_determinant() const;
  /// Dense nm x nm matrix, for verification on small problems.
  Eigen::MatrixXd dense() const;

 private:
  Eigen::MatrixXd loadings_;
  double sigma2_;
  Eigen::Index periods_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> shifted_;
};

/// Factor prior mean paths (n x K) and autocovariances.
struct FactorPrior {
  Eigen::MatrixXd mean;
  std::vector<Eigen::MatrixXd> covariance;
};
FactorPrior factor_prior(const FdfmParameters& params, Eigen::Index n,
                         const RegressorPanel* regressors = nullptr);

/// Conditional moments of the factors given the panel. Requires orthonormal
/// loadings and stationary processes; throws NumericalSingularity when an
/// inner block cannot be factorized.
PosteriorMoments e_step(const FdfmParameters& params, const CurvePanel& panel,
                        const RegressorPanel* regressors = nullptr);

/// Loading update for one factor: minimize
///   (1/s^2)(e ||f||^2 - 2 f'v) + lambda f' Omega f
/// where v = X*' E[beta_k] and e = E||beta_k||^2.
struct RidgeProblem {
  Eigen::VectorXd target;  // v
  double expected_norm;    // e
  double sigma2;
};

/// X* = X - sum_{h != k} E[beta_h] f_h' with the current loadings.
RidgeProblem ridge_problem(int k, const CurvePanel& panel, const PosteriorMoments& posterior,
                           const Eigen::MatrixXd& loadings, double sigma2);

/// S(lambda) = [e/s^2 I + lambda Omega]^{-1} through the cached eigenbasis.
Eigen::MatrixXd smoother_matrix(const RidgeProblem& problem, double lambda,
                                const PenaltyOperator& penalty);
double smoother_trace(const RidgeProblem& problem, double lambda, const PenaltyOperator& penalty);
/// f = s^-2 S(lambda) v.
Eigen::VectorXd solve_ridge(const RidgeProblem& problem, double lambda,
                            const PenaltyOperator& penalty);
Eigen::VectorXd m_step_loading(int k, const CurvePanel& panel, const PosteriorMoments& posterior,
                               const Eigen::MatrixXd& loadings, double lambda, double sigma2,
                               const PenaltyOperator& penalty);

struct GcvTerms {
  double numerator;    // ||(I - e/s^2 S) v||^2 / m
  double denominator;  // (1 - tr(e/s^2 S)/m)^2
  double score() const { return numerator / denominator; }
};
/// Throws DegenerateGcv when the effective degrees of freedom reach m.
GcvTerms gcv_terms(const RidgeProblem& problem, double lambda, const PenaltyOperator& penalty);
double gcv_score(const RidgeProblem& problem, double lambda, const PenaltyOperator& penalty);
double gcv_score(double lambda, int k, const CurvePanel& panel, const PosteriorMoments& posterior,
                 const Eigen::MatrixXd& loadings, double sigma2, const PenaltyOperator& penalty);
/// Grid argmin; ties go to the larger lambda. Throws SelectionFailure when
/// every grid point is degenerate.
double select_lambda(const RidgeProblem& problem, const std::vector<double>& grid,
                     const PenaltyOperator& penalty);

/// AR updates with products of scores replaced by posterior expectations.
std::vector<ArProcess> m_step_ar(const PosteriorMoments& posterior, int p,
                                 const RegressorPanel* regressors = nullptr);

/// (1/nm) E[||X - B F||^2 | X], floored at 1e-14.
double update_sigma2(const CurvePanel& panel, const PosteriorMoments& posterior,
                     const Eigen::MatrixXd& loadings);

struct OrthonormalizeOptions {
  InnerProduct inner_product = InnerProduct::Discrete;
  /// Knot grid, needed for quadrature weights.
  const KnotGrid* grid = nullptr;
  /// Reorder by descending score variance and fix signs.
  bool canonical = true;
};

struct Orthonormalized {
  Eigen::MatrixXd loadings;   // F' = T F
  Eigen::MatrixXd scores;     // B' = B T^{-1}
  Eigen::MatrixXd transform;  // T, K x K
  std::vector<int> order;     // new factor k came from old factor order[k]
  std::vector<double> signs;  // applied after reordering
};

/// Symmetric (Loewdin) orthonormalization T = (F W F')^{-1/2}, followed by
/// the order/sign convention. Throws DegenerateLoadings for rank-deficient F.
Orthonormalized orthonormalize(const Eigen::MatrixXd& loadings, const Eigen::MatrixXd& scores,
                               const OrthonormalizeOptions& options = {});

/// Trapezoid weights on the knots.
Eigen::VectorXd quadrature_weights(const KnotGrid& grid);

struct FitDiagnostics {
  bool converged = false;
  int iterations = 0;
  double final_change = 0.0;
  /// Iterations where the plain EM update lowered the objective and a
  /// shortened step toward it was taken instead.
  int damped_steps = 0;
  /// True when no step along the EM direction increased the objective.
  bool stalled = false;
  std::vector<std::string> warnings;
};

struct FdfmModel {
  KnotGrid grid;
  std::vector<NaturalCubicSpline> loadings;
  std::vector<ArProcess> factors;
  Eigen::MatrixXd scores;  // posterior-mean factor scores, n x K
  double sigma2 = 0.0;
  std::vector<double> lambdas;
  std::vector<double> fit_trace;
  FitDiagnostics diagnostics;
  std::optional<RegressorPanel> regressors;

  int factor_count() const noexcept { return static_cast<int>(loadings.size()); }
  Eigen::Index periods() const noexcept { return scores.rows(); }
  Eigen::MatrixXd loading_matrix() const;
  FdfmParameters parameters() const;
  /// B F on the knots.
  Eigen::MatrixXd fitted_values() const;
};

/// Builds a model from raw parameters and scores (splines completed from the
/// loading rows).
FdfmModel make_model(const KnotGrid& grid, const FdfmParameters& params,
                     const Eigen::MatrixXd& scores);

/// Observed-data log-likelihood minus (1/2) sum lambda_k f_k' Omega f_k: the
/// objective the EM iterations ascend.
double marginal_penalized_loglik(const FdfmParameters& params, const CurvePanel& panel,
                                 const PenaltyOperator& penalty,
                                 const RegressorPanel* regressors = nullptr);

/// Conditional Gaussian log-likelihood of the scores and of the panel given
/// the scores, evaluated at `scores`, minus (1/2) sum lambda_k f_k' Omega f_k.
double penalized_loglik(const FdfmParameters& params, const Eigen::MatrixXd& scores,
                        const CurvePanel& panel, const PenaltyOperator& penalty,
                        const RegressorPanel* regressors = nullptr);
double penalized_loglik(const FdfmModel& model, const CurvePanel& panel);

FdfmModel fit(const CurvePanel& panel, const FdfmConfig& config);

struct CurveForecast {
  Eigen::VectorXd values;
  std::vector<bool> extrapolated;  // eval point outside the knot range
};

/// h-step curve forecast at arbitrary maturities. `future_regressors` is
/// required (h rows) when the factors carry regressors.
CurveForecast forecast_curve(const FdfmModel& model, int horizon,
                             const std::vector<double>& eval_points,
                             const Eigen::MatrixXd* future_regressors = nullptr);
/// Factor forecasts beta_{n+h|n}, one per factor.
Eigen::VectorXd forecast_scores(const FdfmModel& model, int horizon,
                                const Eigen::MatrixXd* future_regressors = nullptr);

struct SynthesizedSeries {
  Eigen::VectorXd values;  // length n
  bool extrapolated = false;
};
SynthesizedSeries synthesize_series(const FdfmModel& model, double maturity);

}  // namespace fdfm
