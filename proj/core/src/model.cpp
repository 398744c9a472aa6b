#include "fdfm/model.hpp"

#include "fdfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fdfm {

std::vector<double> log_spaced_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1)
    throw Error(ErrorCode::Config, "log-spaced grid needs 0 < lo <= hi and count >= 1");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_lambda_grid() { return log_spaced_grid(1e-4, 1e6, 25); }

void FdfmConfig::validate(Eigen::Index n, Eigen::Index m) const {
  if (factors < 1) throw Error(ErrorCode::Config, "K must be at least 1");
  if (ar_order < 1) throw Error(ErrorCode::Config, "p must be at least 1");
  if (factors >= std::min(n, m))
    throw Error(ErrorCode::Config, "K must be smaller than both panel dimensions");
  if (n < 2 * ar_order + 5)
    throw Error(ErrorCode::Config, "panel too short: need n >= 2p + 5");
  if (!(em_tolerance > 0.0)) throw Error(ErrorCode::Config, "em_tolerance must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::Config, "max_iterations must be at least 1");
  if (gcv_enabled && lambda_grid.empty())
    throw Error(ErrorCode::Config, "lambda grid is empty with GCV enabled");
  for (double l : lambda_grid)
    if (!(l > 0.0) || !std::isfinite(l))
      throw Error(ErrorCode::Config, "lambda grid entries must be positive");
  if (fixed_lambdas) {
    if (static_cast<int>(fixed_lambdas->size()) != factors)
      throw Error(ErrorCode::Config, "fixed_lambdas needs one value per factor");
    for (double l : *fixed_lambdas)
      if (!(l >= 0.0) || !std::isfinite(l))
        throw Error(ErrorCode::Config, "fixed lambdas must be non-negative");
  }
  if (regressors && regressors->periods() < n)
    throw Error(ErrorCode::Config, "regressor panel shorter than the curve panel");
}

SvdInit initialize_svd(const CurvePanel& panel, int factors) {
  const auto& x = panel.data();
  if (factors < 1 || factors > std::min(x.rows(), x.cols()))
    throw Error(ErrorCode::RankDeficiency, "K exceeds the panel dimensions");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || !(s(factors - 1) > 1e-12 * s(0)))
    throw Error(ErrorCode::RankDeficiency,
                "panel rank is below K = " + std::to_string(factors));
  SvdInit out;
  out.singular_values = s;
  out.scores = svd.matrixU().leftCols(factors) * s.head(factors).asDiagonal();
  out.loadings = svd.matrixV().leftCols(factors).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Loadings

RidgeProblem ridge_problem(int k, const CurvePanel& panel, const PosteriorMoments& posterior,
                           const Eigen::MatrixXd& loadings, double sigma2) {
  const auto& m = posterior.mean;
  Eigen::VectorXd v = panel.data().transpose() * m.col(k);
  for (Eigen::Index h = 0; h < loadings.rows(); ++h) {
    if (h == k) continue;
    v.noalias() -= m.col(h).dot(m.col(k)) * loadings.row(h).transpose();
  }
  return RidgeProblem{std::move(v), posterior.expected_squared_norm(k), sigma2};
}

namespace {

Eigen::VectorXd smoother_diagonal(const RidgeProblem& pr, double lambda,
                                  const PenaltyOperator& penalty) {
  const double a = pr.expected_norm / pr.sigma2;
  return (a + lambda * penalty.eigenvalues().array()).inverse().matrix();
}

}  // namespace

Eigen::MatrixXd smoother_matrix(const RidgeProblem& problem, double lambda,
                                const PenaltyOperator& penalty) {
  const auto& g = penalty.eigenvectors();
  return g * smoother_diagonal(problem, lambda, penalty).asDiagonal() * g.transpose();
}

double smoother_trace(const RidgeProblem& problem, double lambda, const PenaltyOperator& penalty) {
  return smoother_diagonal(problem, lambda, penalty).sum();
}

Eigen::VectorXd solve_ridge(const RidgeProblem& problem, double lambda,
                            const PenaltyOperator& penalty) {
  if (problem.target.size() != static_cast<Eigen::Index>(penalty.grid().size()))
    throw Error(ErrorCode::Dimension, "ridge target does not match the penalty grid");
  const auto& g = penalty.eigenvectors();
  const Eigen::VectorXd y = g.transpose() * problem.target;
  const Eigen::VectorXd d = smoother_diagonal(problem, lambda, penalty);
  if (!d.allFinite())
    throw Error(ErrorCode::NumericalSingularity, "ridge system is singular");
  return g * (d.cwiseProduct(y) / problem.sigma2);
}

Eigen::VectorXd m_step_loading(int k, const CurvePanel& panel, const PosteriorMoments& posterior,
                               const Eigen::MatrixXd& loadings, double lambda, double sigma2,
                               const PenaltyOperator& penalty) {
  return solve_ridge(ridge_problem(k, panel, posterior, loadings, sigma2), lambda, penalty);
}

GcvTerms gcv_terms(const RidgeProblem& problem, double lambda, const PenaltyOperator& penalty) {
  const auto m = static_cast<double>(problem.target.size());
  const double a = problem.expected_norm / problem.sigma2;
  const auto& g = penalty.eigenvectors();
  const Eigen::VectorXd y = g.transpose() * problem.target;
  const Eigen::ArrayXd d = smoother_diagonal(problem, lambda, penalty).array();
  // (I - a S) v in the eigenbasis: y_j (1 - a d_j)
  const double num = (y.array() * (1.0 - a * d)).square().sum() / m;
  const double base = 1.0 - a * d.sum() / m;
  if (!(base > 1e-12) || !std::isfinite(num))
    throw Error(ErrorCode::DegenerateGcv, "effective degrees of freedom reach m");
  return GcvTerms{num, base * base};
}

double gcv_score(const RidgeProblem& problem, double lambda, const PenaltyOperator& penalty) {
  return gcv_terms(problem, lambda, penalty).score();
}

double gcv_score(double lambda, int k, const CurvePanel& panel, const PosteriorMoments& posterior,
                 const Eigen::MatrixXd& loadings, double sigma2, const PenaltyOperator& penalty) {
  return gcv_score(ridge_problem(k, panel, posterior, loadings, sigma2), lambda, penalty);
}

double select_lambda(const RidgeProblem& problem, const std::vector<double>& grid,
                     const PenaltyOperator& penalty) {
  if (grid.empty()) throw Error(ErrorCode::SelectionFailure, "empty lambda grid");
  double best = 0.0, best_score = 0.0;
  bool found = false;
  for (double lambda : grid) {
    double score;
    try {
      score = gcv_score(problem, lambda, penalty);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateGcv) continue;
      throw;
    }
    const double tol = 1e-12 * std::abs(best_score);
    if (!found || score < best_score - tol ||
        (std::abs(score - best_score) <= tol && lambda > best)) {
      best = lambda;
      best_score = score;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::SelectionFailure, "every lambda on the grid is degenerate");
  return best;
}

// ---------------------------------------------------------------------------
// AR and noise

std::vector<ArProcess> m_step_ar(const PosteriorMoments& posterior, int p,
                                 const RegressorPanel* regressors) {
  std::vector<ArProcess> out;
  out.reserve(posterior.factor_count());
  for (int k = 0; k < posterior.factor_count(); ++k) {
    const auto mom = posterior.factor_moments(k);
    out.push_back(regressors ? fit_fgls(mom, *regressors, p) : fit_ols(mom, p));
  }
  return out;
}

double update_sigma2(const CurvePanel& panel, const PosteriorMoments& posterior,
                     const Eigen::MatrixXd& loadings) {
  const auto& x = panel.data();
  double total = (x - posterior.mean * loadings).squaredNorm();
  for (int k = 0; k < posterior.factor_count(); ++k)
    total += posterior.cov_blocks[k].trace() * loadings.row(k).squaredNorm();
  return std::max(total / static_cast<double>(x.size()), 1e-14);
}

// ---------------------------------------------------------------------------
// Orthonormalization

Eigen::VectorXd quadrature_weights(const KnotGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    w(j) += 0.5 * grid.gap(j);
    w(j + 1) += 0.5 * grid.gap(j);
  }
  return w;
}

Orthonormalized orthonormalize(const Eigen::MatrixXd& loadings, const Eigen::MatrixXd& scores,
                               const OrthonormalizeOptions& options) {
  const auto K = loadings.rows();
  if (scores.cols() != K) throw Error(ErrorCode::Dimension, "scores and loadings disagree on K");
  Eigen::MatrixXd gram;
  if (options.inner_product == InnerProduct::Quadrature) {
    if (!options.grid) throw Error(ErrorCode::Config, "quadrature inner product needs the grid");
    gram = loadings * quadrature_weights(*options.grid).asDiagonal() * loadings.transpose();
  } else {
    gram = loadings * loadings.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (gram + gram.transpose()));
  const auto& ev = eig.eigenvalues();
  if (!ev.allFinite() || !(ev.maxCoeff() > 0.0) || !(ev.minCoeff() > 1e-12 * ev.maxCoeff()))
    throw Error(ErrorCode::DegenerateLoadings, "loadings are not of full row rank");
  const auto& v = eig.eigenvectors();
  Eigen::MatrixXd t = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  Eigen::MatrixXd t_inv = v * ev.cwiseSqrt().asDiagonal() * v.transpose();

  Orthonormalized out;
  out.order.resize(K);
  std::iota(out.order.begin(), out.order.end(), 0);
  out.signs.assign(K, 1.0);
  Eigen::MatrixXd f = t * loadings;
  Eigen::MatrixXd b = scores * t_inv;
  if (options.canonical) {
    std::vector<double> var(K);
    for (Eigen::Index k = 0; k < K; ++k) {
      const auto c = b.col(k).array() - b.col(k).mean();
      var[k] = c.square().sum();
    }
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](int a, int c) { return var[a] > var[c]; });
    Eigen::MatrixXd t2(K, K), t2_inv(K, K);
    for (Eigen::Index k = 0; k < K; ++k) {
      const int src = out.order[k];
      Eigen::Index arg = 0;
      f.row(src).cwiseAbs().maxCoeff(&arg);
      out.signs[k] = f(src, arg) < 0.0 ? -1.0 : 1.0;
      t2.row(k) = out.signs[k] * t.row(src);
      t2_inv.col(k) = out.signs[k] * t_inv.col(src);
    }
    t = std::move(t2);
    t_inv = std::move(t2_inv);
    f = t * loadings;
    b = scores * t_inv;
  }
  out.loadings = std::move(f);
  out.scores = std::move(b);
  out.transform = std::move(t);
  return out;
}

// ---------------------------------------------------------------------------
// Models and likelihoods

Eigen::MatrixXd FdfmModel::loading_matrix() const {
  Eigen::MatrixXd f(loadings.size(), grid.size());
  for (std::size_t k = 0; k < loadings.size(); ++k) f.row(k) = loadings[k].values().transpose();
  return f;
}

FdfmParameters FdfmModel::parameters() const {
  return FdfmParameters{loading_matrix(), factors, sigma2, lambdas};
}

Eigen::MatrixXd FdfmModel::fitted_values() const { return scores * loading_matrix(); }

FdfmModel make_model(const KnotGrid& grid, const FdfmParameters& params,
                     const Eigen::MatrixXd& scores) {
  if (params.loadings.cols() != static_cast<Eigen::Index>(grid.size()))
    throw Error(ErrorCode::Dimension, "loadings do not match the grid");
  FdfmModel model{grid, {}, params.factors, scores, params.sigma2, params.lambdas, {}, {}, {}};
  for (Eigen::Index k = 0; k < params.loadings.rows(); ++k)
    model.loadings.push_back(complete_spline(params.loadings.row(k).transpose(), grid));
  return model;
}

namespace {

double roughness_penalty(const FdfmParameters& params, const PenaltyOperator& penalty) {
  double out = 0.0;
  for (int k = 0; k < params.factor_count(); ++k) {
    const double lambda = k < static_cast<int>(params.lambdas.size()) ? params.lambdas[k] : 0.0;
    if (lambda == 0.0) continue;
    const Eigen::VectorXd f = params.loadings.row(k).transpose();
    out += lambda * f.dot(penalty.omega() * f);
  }
  return 0.5 * out;
}

}  // namespace

double marginal_penalized_loglik(const FdfmParameters& params, const CurvePanel& panel,
                                 const PenaltyOperator& penalty,
                                 const RegressorPanel* regressors) {
  return e_step(params, panel, regressors).log_likelihood - roughness_penalty(params, penalty);
}

double penalized_loglik(const FdfmParameters& params, const Eigen::MatrixXd& scores,
                        const CurvePanel& panel, const PenaltyOperator& penalty,
                        const RegressorPanel* regressors) {
  const auto& x = panel.data();
  const auto n = x.rows();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double out = 0.0;
  for (int k = 0; k < params.factor_count(); ++k) {
    const auto& proc = params.factors[k];
    const int p = proc.order;
    Eigen::VectorXd u = scores.col(k);
    double c = proc.intercept;
    if (proc.has_regressors()) {
      if (!regressors) throw Error(ErrorCode::Dimension, "factor needs regressor rows");
      u -= regressors->rows.topRows(n) * *proc.regressor_coefficients;
      c = 0.0;
    }
    const double s2 = proc.innovation_variance;
    for (Eigen::Index i = p; i < n; ++i) {
      double e = u(i) - c;
      for (int r = 1; r <= p; ++r) e -= proc.coefficients(r - 1) * u(i - r);
      out -= 0.5 * (log2pi + std::log(s2) + e * e / s2);
    }
  }
  const double nm = static_cast<double>(x.size());
  out -= 0.5 * (nm * (log2pi + std::log(params.sigma2)) +
                (x - scores * params.loadings).squaredNorm() / params.sigma2);
  return out - roughness_penalty(params, penalty);
}

double penalized_loglik(const FdfmModel& model, const CurvePanel& panel) {
  const auto penalty = build_penalty(model.grid);
  return penalized_loglik(model.parameters(), model.scores, panel, penalty,
                          model.regressors ? &*model.regressors : nullptr);
}

// ---------------------------------------------------------------------------
// Estimation

namespace {

struct EmState {
  FdfmParameters params;
  PosteriorMoments posterior;
  double objective;
};

ArProcess stationary(ArProcess proc, std::vector<std::string>& warnings, int k) {
  if (is_stationary(proc)) return proc;
  warnings.push_back("factor " + std::to_string(k + 1) +
                     ": AR estimate outside the stationary region, shrunk radially");
  return shrink_to_stationary(proc, 0.99);
}

ArProcess fit_factor(const SeriesMoments& mom, int p, const RegressorPanel* regs,
                     std::vector<std::string>& warnings, int k) {
  if (!regs) return stationary(fit_ols(mom, p), warnings, k);
  try {
    return stationary(fit_fgls(mom, *regs, p), warnings, k);
  } catch (const FglsConvergenceError& e) {
    warnings.push_back("factor " + std::to_string(k + 1) + ": " + e.what());
    return stationary(e.last_iterate(), warnings, k);
  }
}

double relative_change(double a, double b) { return std::abs(b - a) / (1.0 + std::abs(a)); }

double max_relative_change(const FdfmParameters& a, const FdfmParameters& b) {
  double out = relative_change(a.sigma2, b.sigma2);
  for (Eigen::Index i = 0; i < a.loadings.size(); ++i)
    out = std::max(out, relative_change(a.loadings.data()[i], b.loadings.data()[i]));
  for (std::size_t k = 0; k < a.factors.size(); ++k) {
    const auto& p = a.factors[k];
    const auto& q = b.factors[k];
    out = std::max(out, relative_change(p.intercept, q.intercept));
    out = std::max(out, relative_change(p.innovation_variance, q.innovation_variance));
    for (Eigen::Index r = 0; r < p.coefficients.size(); ++r)
      out = std::max(out, relative_change(p.coefficients(r), q.coefficients(r)));
    if (p.has_regressors() && q.has_regressors())
      for (Eigen::Index r = 0; r < p.regressor_coefficients->size(); ++r)
        out = std::max(out, relative_change((*p.regressor_coefficients)(r),
                                            (*q.regressor_coefficients)(r)));
  }
  return out;
}

// One EM update. Loadings are orthonormalized without reordering so the
// iterates stay comparable.
FdfmParameters m_step(const FdfmParameters& params, const PosteriorMoments& post,
                      const CurvePanel& panel, const PenaltyOperator& penalty,
                      const FdfmConfig& config, const RegressorPanel* regs,
                      std::vector<std::string>& warnings) {
  const int K = params.factor_count();
  FdfmParameters next = params;
  for (int k = 0; k < K; ++k) {
    auto problem = ridge_problem(k, panel, post, next.loadings, params.sigma2);
    if (problem.expected_norm < 1e-12) {
      warnings.push_back("factor " + std::to_string(k + 1) +
                         ": vanishing score energy, loading frozen this iteration");
      continue;
    }
    if (config.gcv_enabled) next.lambdas[k] = select_lambda(problem, config.lambda_grid, penalty);
    next.loadings.row(k) = solve_ridge(problem, next.lambdas[k], penalty).transpose();
  }
  next.sigma2 = update_sigma2(panel, post, next.loadings);

  const auto orth = orthonormalize(next.loadings, post.mean, {InnerProduct::Discrete, nullptr, false});
  next.loadings = orth.loadings;
  const Eigen::MatrixXd t_inv = orth.transform.inverse();
  PosteriorMoments moved;
  moved.mean = orth.scores;
  for (int k = 0; k < K; ++k) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(post.periods(), post.periods());
    for (int j = 0; j < K; ++j) c += t_inv(j, k) * t_inv(j, k) * post.cov_blocks[j];
    moved.cov_blocks.push_back(std::move(c));
  }
  for (int k = 0; k < K; ++k)
    next.factors[k] = fit_factor(moved.factor_moments(k), config.ar_order, regs, warnings, k);
  return next;
}

FdfmParameters blend(const FdfmParameters& a, const FdfmParameters& b, double s) {
  FdfmParameters out = b;
  Eigen::MatrixXd f = (1.0 - s) * a.loadings + s * b.loadings;
  const Eigen::MatrixXd dummy = Eigen::MatrixXd::Zero(1, f.rows());
  out.loadings = orthonormalize(f, dummy, {InnerProduct::Discrete, nullptr, false}).loadings;
  out.sigma2 = (1.0 - s) * a.sigma2 + s * b.sigma2;
  for (std::size_t k = 0; k < out.factors.size(); ++k) {
    auto& q = out.factors[k];
    const auto& p = a.factors[k];
    q.coefficients = (1.0 - s) * p.coefficients + s * q.coefficients;
    q.intercept = (1.0 - s) * p.intercept + s * q.intercept;
    q.innovation_variance = (1.0 - s) * p.innovation_variance + s * q.innovation_variance;
    if (q.has_regressors() && p.has_regressors())
      *q.regressor_coefficients =
          (1.0 - s) * *p.regressor_coefficients + s * *q.regressor_coefficients;
    if (!is_stationary(q)) q = shrink_to_stationary(q, 0.99);
  }
  return out;
}

std::optional<EmState> evaluate(const FdfmParameters& params, const CurvePanel& panel,
                                const PenaltyOperator& penalty, const RegressorPanel* regs) {
  try {
    auto post = e_step(params, panel, regs);
    const double obj = post.log_likelihood - roughness_penalty(params, penalty);
    if (!std::isfinite(obj)) return std::nullopt;
    return EmState{params, std::move(post), obj};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NumericalSingularity || e.code() == ErrorCode::NonStationary ||
        e.code() == ErrorCode::DegenerateLoadings)
      return std::nullopt;
    throw;
  }
}

void permute_and_flip(FdfmParameters& params, const std::vector<int>& order,
                      const std::vector<double>& signs) {
  const auto old = params;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto proc = old.factors[order[k]];
    if (signs[k] < 0.0) {
      proc.intercept = -proc.intercept;
      if (proc.has_regressors()) *proc.regressor_coefficients = -*proc.regressor_coefficients;
    }
    params.factors[k] = std::move(proc);
    params.lambdas[k] = old.lambdas[order[k]];
  }
}

}  // namespace

FdfmModel fit(const CurvePanel& panel, const FdfmConfig& config) {
  const auto n = panel.periods();
  const auto m = panel.maturities();
  config.validate(n, m);
  const int K = config.factors;
  const auto penalty = build_penalty(panel.grid());
  const RegressorPanel* regs = config.regressors ? &*config.regressors : nullptr;
  std::optional<RegressorPanel> trimmed;
  if (regs && regs->periods() != n) {
    trimmed = RegressorPanel{regs->rows.topRows(n)};
    regs = &*trimmed;
  }
  FitDiagnostics diag;

  // Step 0
  const auto init = initialize_svd(panel, K);
  const auto canon = orthonormalize(init.loadings, init.scores);
  FdfmParameters params;
  params.loadings = canon.loadings;
  for (int k = 0; k < K; ++k)
    params.factors.push_back(
        fit_factor(SeriesMoments{canon.scores.col(k), {}}, config.ar_order, regs, diag.warnings, k));
  params.sigma2 = std::max(
      (panel.data() - canon.scores * canon.loadings).squaredNorm() / static_cast<double>(n * m),
      1e-14);
  if (config.fixed_lambdas) {
    params.lambdas = *config.fixed_lambdas;
  } else if (config.gcv_enabled) {
    params.lambdas.assign(K, config.lambda_grid[config.lambda_grid.size() / 2]);
  } else {
    params.lambdas.assign(K, 0.0);
  }

  auto state = evaluate(params, panel, penalty, regs);
  if (!state) throw Error(ErrorCode::NumericalSingularity, "initial model has a singular covariance");
  std::vector<double> trace{state->objective};

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    diag.iterations = iter;
    const auto cand = m_step(state->params, state->posterior, panel, penalty, config, regs,
                             diag.warnings);
    // Objective of the current iterate under the candidate smoothing parameters.
    FdfmParameters ref_params = state->params;
    ref_params.lambdas = cand.lambdas;
    const double reference =
        state->posterior.log_likelihood - roughness_penalty(ref_params, penalty);

    std::optional<EmState> next = evaluate(cand, panel, penalty, regs);
    if (!next || next->objective < reference) {
      next.reset();
      double s = 0.5;
      for (int tries = 0; tries < 30; ++tries, s *= 0.5) {
        auto trial = evaluate(blend(ref_params, cand, s), panel, penalty, regs);
        if (trial && trial->objective >= reference) {
          next = std::move(trial);
          break;
        }
      }
      if (!next) {
        diag.stalled = true;
        diag.converged = true;
        diag.final_change = 0.0;
        diag.warnings.push_back("objective could not be increased; stopping at iteration " +
                                std::to_string(iter));
        break;
      }
      ++diag.damped_steps;
    }
    diag.final_change = max_relative_change(state->params, next->params);
    state = std::move(next);
    trace.push_back(state->objective);
    if (diag.final_change < config.em_tolerance) {
      diag.converged = true;
      break;
    }
  }

  // Order/sign convention.
  auto& fp = state->params;
  auto& post = state->posterior;
  const auto final_orth = orthonormalize(fp.loadings, post.mean);
  permute_and_flip(fp, final_orth.order, final_orth.signs);
  fp.loadings = final_orth.loadings;
  Eigen::MatrixXd scores = final_orth.scores;
  if (fp.sigma2 <= 1e-14)
    diag.warnings.push_back("noise variance clamped at 1e-14");

  if (config.inner_product == InnerProduct::Quadrature) {
    const auto q = orthonormalize(fp.loadings, scores,
                                  {InnerProduct::Quadrature, &panel.grid(), true});
    fp.loadings = q.loadings;
    scores = q.scores;
    std::vector<double> lambdas(K);
    for (int k = 0; k < K; ++k) {
      lambdas[k] = fp.lambdas[q.order[k]];
      fp.factors[k] = fit_factor(SeriesMoments{scores.col(k), {}}, config.ar_order, regs,
                                 diag.warnings, k);
    }
    fp.lambdas = lambdas;
  }

  auto model = make_model(panel.grid(), fp, scores);
  model.fit_trace = std::move(trace);
  model.diagnostics = std::move(diag);
  if (regs) model.regressors = *regs;
  return model;
}

// ---------------------------------------------------------------------------
// Forecasting and synthesis

Eigen::VectorXd forecast_scores(const FdfmModel& model, int horizon,
                                const Eigen::MatrixXd* future_regressors) {
  if (horizon < 1) throw Error(ErrorCode::Domain, "forecast horizon must be at least 1");
  const int K = model.factor_count();
  Eigen::VectorXd out(K);
  for (int k = 0; k < K; ++k) {
    const auto& proc = model.factors[k];
    const Eigen::VectorXd hist = model.scores.col(k);
    Eigen::VectorXd path;
    if (proc.has_regressors()) {
      if (!future_regressors || !model.regressors)
        throw Error(ErrorCode::Dimension, "forecast needs future regressor rows");
      path = forecast(proc, hist, model.regressors->rows.topRows(hist.size()), *future_regressors,
                      horizon);
    } else {
      path = forecast(proc, hist, horizon);
    }
    out(k) = path(horizon - 1);
  }
  return out;
}

CurveForecast forecast_curve(const FdfmModel& model, int horizon,
                             const std::vector<double>& eval_points,
                             const Eigen::MatrixXd* future_regressors) {
  const Eigen::VectorXd beta = forecast_scores(model, horizon, future_regressors);
  CurveForecast out{Eigen::VectorXd::Zero(eval_points.size()), {}};
  out.extrapolated.resize(eval_points.size());
  for (std::size_t j = 0; j < eval_points.size(); ++j) {
    const double t = eval_points[j];
    out.extrapolated[j] = !model.grid.contains(t);
    for (int k = 0; k < model.factor_count(); ++k) out.values(j) += beta(k) * evaluate(model.loadings[k], t);
  }
  return out;
}

SynthesizedSeries synthesize_series(const FdfmModel& model, double maturity) {
  Eigen::VectorXd f(model.factor_count());
  for (int k = 0; k < model.factor_count(); ++k) f(k) = evaluate(model.loadings[k], maturity);
  return SynthesizedSeries{model.scores * f, !model.grid.contains(maturity)};
}

}  // namespace fdfm
