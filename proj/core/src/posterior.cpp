#include "fdfm/model.hpp"

#include "fdfm/errors.hpp"

#include <cmath>
#include <numbers>

namespace fdfm {

Eigen::VectorXd PosteriorMoments::stacked_mean() const {
  return Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
}

Eigen::MatrixXd PosteriorMoments::second_moment(int k, int h) const {
  Eigen::MatrixXd out = mean.col(k) * mean.col(h).transpose();
  if (k == h) out += cov_blocks[k];
  return out;
}

double PosteriorMoments::expected_squared_norm(int k) const {
  return cov_blocks[k].trace() + mean.col(k).squaredNorm();
}

SeriesMoments PosteriorMoments::factor_moments(int k) const {
  return SeriesMoments{mean.col(k), cov_blocks[k]};
}

WoodburyInverse::WoodburyInverse(const Eigen::MatrixXd& loadings,
                                 const std::vector<Eigen::MatrixXd>& factor_covs, double sigma2)
    : loadings_(loadings), sigma2_(sigma2), periods_(0) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::NumericalSingularity, "noise variance must be positive");
  if (static_cast<Eigen::Index>(factor_covs.size()) != loadings.rows())
    throw Error(ErrorCode::Dimension, "one covariance block per factor required");
  if (!factor_covs.empty()) periods_ = factor_covs.front().rows();
  shifted_.reserve(factor_covs.size());
  for (std::size_t k = 0; k < factor_covs.size(); ++k) {
    const auto& c = factor_covs[k];
    if (c.rows() != periods_ || c.cols() != periods_)
      throw Error(ErrorCode::Dimension, "covariance blocks must be n x n");
    Eigen::MatrixXd a = c;
    a.diagonal().array() += sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::NumericalSingularity,
                  "inner block for factor " + std::to_string(k + 1) + " is not positive definite");
    // LLT succeeds on tiny negative pivots it clamps; check the factor too.
    const Eigen::VectorXd d = llt.matrixLLT().diagonal();
    if (!(d.minCoeff() > 0.0) || !d.allFinite())
      throw Error(ErrorCode::NumericalSingularity,
                  "inner block for factor " + std::to_string(k + 1) + " is singular");
    shifted_.push_back(std::move(llt));
  }
}

Eigen::MatrixXd WoodburyInverse::project_apply(const Eigen::MatrixXd& residual) const {
  const Eigen::MatrixXd z = residual * loadings_.transpose();
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (std::size_t k = 0; k < shifted_.size(); ++k) out.col(k) = shifted_[k].solve(z.col(k));
  return out;
}

Eigen::MatrixXd WoodburyInverse::inner_block(int k) const {
  // [s^-2 I + S^-1]^-1 = s^2 I - s^4 (S + s^2 I)^-1
  Eigen::MatrixXd out = -sigma2_ * sigma2_ * shifted_inverse(k);
  out.diagonal().array() += sigma2_;
  return out;
}

Eigen::MatrixXd WoodburyInverse::shifted_inverse(int k) const {
  return shifted_[k].solve(Eigen::MatrixXd::Identity(periods_, periods_));
}

Eigen::MatrixXd WoodburyInverse::apply(const Eigen::MatrixXd& residual) const {
  const double s2 = sigma2_;
  Eigen::MatrixXd out = residual / s2;
  const Eigen::MatrixXd z = residual * loadings_.transpose();
  for (std::size_t k = 0; k < shifted_.size(); ++k) {
    const Eigen::VectorXd w = inner_block(static_cast<int>(k)) * z.col(k);
    out.noalias() -= (w / (s2 * s2)) * loadings_.row(k);
  }
  return out;
}

double WoodburyInverse::log_determinant() const {
  const auto m = loadings_.cols();
  const auto K = loadings_.rows();
  double out = static_cast<double>(periods_ * (m - K)) * std::log(sigma2_);
  for (const auto& llt : shifted_)
    out += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return out;
}

Eigen::MatrixXd WoodburyInverse::dense() const {
  const auto n = periods_;
  const auto m = loadings_.cols();
  const auto K = loadings_.rows();
  // vec(X) stacks columns of the n x m panel: entry (i, j) sits at j*n + i.
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(n * m, n * m) / sigma2_;
  const double s4 = sigma2_ * sigma2_;
  for (Eigen::Index k = 0; k < K; ++k) {
    const Eigen::MatrixXd inner = inner_block(static_cast<int>(k));
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index l = 0; l < m; ++l)
        out.block(j * n, l * n, n, n) -= (loadings_(k, j) * loadings_(k, l) / s4) * inner;
  }
  return out;
}

FactorPrior factor_prior(const FdfmParameters& params, Eigen::Index n,
                         const RegressorPanel* regressors) {
  const int K = params.factor_count();
  if (static_cast<int>(params.factors.size()) != K)
    throw Error(ErrorCode::Dimension, "one AR process per loading required");
  FactorPrior out{Eigen::MatrixXd(n, K), {}};
  out.covariance.reserve(K);
  for (int k = 0; k < K; ++k) {
    const auto& proc = params.factors[k];
    const auto moments = unconditional_moments(proc, n);
    out.mean.col(k) = mean_path(proc, n, proc.has_regressors() ? regressors : nullptr);
    out.covariance.push_back(moments.autocovariance);
  }
  return out;
}

namespace {

void require_orthonormal(const Eigen::MatrixXd& f) {
  const auto K = f.rows();
  const double dev =
      (f * f.transpose() - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff();
  if (!(dev < 1e-8))
    throw Error(ErrorCode::DegenerateLoadings, "conditional moments need orthonormal loadings");
}

}  // namespace

PosteriorMoments e_step(const FdfmParameters& params, const CurvePanel& panel,
                        const RegressorPanel* regressors) {
  const auto& x = panel.data();
  const auto n = x.rows();
  const auto m = x.cols();
  const int K = params.factor_count();
  if (params.loadings.cols() != m)
    throw Error(ErrorCode::Dimension, "loadings do not match the panel grid");
  require_orthonormal(params.loadings);
  if (regressors && regressors->periods() != n)
    throw Error(ErrorCode::Dimension, "regressor rows must match panel periods");

  const auto prior = factor_prior(params, n, regressors);
  const WoodburyInverse winv(params.loadings, prior.covariance, params.sigma2);

  // R = X - E[X] = X - sum_k mu_k f_k'
  const Eigen::MatrixXd resid = x - prior.mean * params.loadings;
  const Eigen::MatrixXd z = resid * params.loadings.transpose();  // n x K
  const Eigen::MatrixXd az = winv.project_apply(resid);           // A_k^-1 z_k

  PosteriorMoments post;
  post.mean.resize(n, K);
  post.cov_blocks.reserve(K);
  const double s2 = params.sigma2;
  double quad = 0.0;
  for (int k = 0; k < K; ++k) {
    // Sigma_k A^-1 z = z - s^2 A^-1 z
    post.mean.col(k) = prior.mean.col(k) + z.col(k) - s2 * az.col(k);
    Eigen::MatrixXd cov = -s2 * s2 * winv.shifted_inverse(k);
    cov.diagonal().array() += s2;
    cov = 0.5 * (cov + cov.transpose()).eval();
    post.cov_blocks.push_back(std::move(cov));
    quad += z.col(k).dot(az.col(k));
  }
  // Component of the residual orthogonal to the loading space.
  quad += (resid - z * params.loadings).squaredNorm() / s2;
  const double nm = static_cast<double>(n * m);
  post.log_likelihood =
      -0.5 * (nm * std::log(2.0 * std::numbers::pi) + winv.log_determinant() + quad);
  return post;
}

}  // namespace fdfm
