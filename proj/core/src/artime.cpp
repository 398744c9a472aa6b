#include "fdfm/artime.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdfm {

double ArProcess::mean() const {
  const double denom = 1.0 - coefficient_sum();
  if (denom == 0.0) {
    throw Error(ErrorCode::NonStationary, "unit root: mean is undefined");
  }
  return intercept / denom;
}

namespace {

void check_order(Eigen::Index n, int p) {
  if (p < 1) throw Error(ErrorCode::Dimension, "AR order must be at least 1");
  if (n <= p + 2) {
    throw Error(ErrorCode::Dimension, "series of length " + std::to_string(n) +
                                          " is too short for AR(" + std::to_string(p) + ")");
  }
}

// Solves G theta = g after scaling G to unit diagonal; rejects near-singular
// designs such as a constant series (intercept collinear with the lags).
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                                       const char* what) {
  const Eigen::VectorXd diag = gram.diagonal();
  if ((diag.array() <= 0.0).any()) {
    throw Error(ErrorCode::DegenerateSeries, std::string(what) + ": zero-variance regressor");
  }
  const Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = scale.asDiagonal() * gram * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * hi)) {
    throw Error(ErrorCode::DegenerateSeries, std::string(what) + ": rank-deficient design");
  }
  const Eigen::VectorXd z = scaled.ldlt().solve(scale.asDiagonal() * rhs);
  return scale.asDiagonal() * z;
}

double floor_variance(double rss, double count, double scale) {
  const double floor = std::max(1e-14 * scale, std::numeric_limits<double>::min());
  return std::max(rss / count, floor);
}

}  // namespace

ArProcess fit_ols(const SeriesMoments& mom, int p) {
  const Eigen::Index n = mom.size();
  check_order(n, p);
  const Eigen::Index dim = p + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(dim);
  double yy = 0.0;
  // Regressor z_i = (1, beta_{i-1}, ..., beta_{i-p}); response beta_i.
  for (Eigen::Index i = p; i < n; ++i) {
    gram(0, 0) += 1.0;
    cross(0) += mom.mean(i);
    yy += mom.second(i, i);
    for (Eigen::Index r = 1; r <= p; ++r) {
      gram(0, r) += mom.mean(i - r);
      cross(r) += mom.second(i, i - r);
      for (Eigen::Index s = r; s <= p; ++s) gram(r, s) += mom.second(i - r, i - s);
    }
  }
  gram.triangularView<Eigen::StrictlyLower>() = gram.transpose().eval();

  const Eigen::VectorXd theta = solve_normal_equations(gram, cross, "AR least squares");
  const double count = static_cast<double>(n - p);
  const double rss = yy - 2.0 * theta.dot(cross) + theta.dot(gram * theta);

  ArProcess proc;
  proc.order = p;
  proc.intercept = theta(0);
  proc.coefficients = theta.tail(p);
  proc.innovation_variance = floor_variance(rss, count, yy / count);
  return proc;
}

ArProcess fit_ols(const Eigen::VectorXd& series, int p) {
  if (!series.allFinite()) throw Error(ErrorCode::Data, "AR fit: series has non-finite values");
  return fit_ols(SeriesMoments{series, {}}, p);
}

ArProcess fit_fgls(const SeriesMoments& mom, const RegressorPanel& regs, int p,
                   const FglsOptions& options) {
  const Eigen::Index n = mom.size();
  check_order(n, p);
  const Eigen::MatrixXd& a = regs.rows;
  if (a.rows() != n || a.cols() < 1) {
    throw Error(ErrorCode::Dimension, "regressor panel must have one row per period");
  }
  const Eigen::Index d = a.cols();

  // mu by least squares on the raw series to start (phi = 0).
  Eigen::VectorXd mu = solve_normal_equations(a.transpose() * a, a.transpose() * mom.mean,
                                              "regressor least squares");
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(p);

  // E[u_a u_b] for u = beta - A mu.
  auto u_second = [&](Eigen::Index x, Eigen::Index y, const Eigen::VectorXd& fitted) {
    return mom.second(x, y) - fitted(x) * mom.mean(y) - fitted(y) * mom.mean(x) +
           fitted(x) * fitted(y);
  };

  ArProcess proc;
  proc.order = p;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    // phi given mu: least squares of u_i on its lags, no intercept.
    const Eigen::VectorXd fitted = a * mu;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd cross = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = p; i < n; ++i) {
      for (Eigen::Index r = 1; r <= p; ++r) {
        cross(r - 1) += u_second(i, i - r, fitted);
        for (Eigen::Index s = 1; s <= p; ++s) gram(r - 1, s - 1) += u_second(i - r, i - s, fitted);
      }
    }
    const Eigen::VectorXd new_phi = solve_normal_equations(gram, cross, "FGLS lag regression");

    // mu given phi: least squares on the AR-filtered regression.
    Eigen::MatrixXd a_star(n - p, d);
    Eigen::VectorXd y_star(n - p);
    for (Eigen::Index i = p; i < n; ++i) {
      a_star.row(i - p) = a.row(i);
      y_star(i - p) = mom.mean(i);
      for (Eigen::Index r = 1; r <= p; ++r) {
        a_star.row(i - p) -= new_phi(r - 1) * a.row(i - r);
        y_star(i - p) -= new_phi(r - 1) * mom.mean(i - r);
      }
    }
    const Eigen::VectorXd new_mu = solve_normal_equations(
        a_star.transpose() * a_star, a_star.transpose() * y_star, "FGLS regressor step");

    double change = 0.0;
    for (Eigen::Index r = 0; r < p; ++r) {
      change = std::max(change, std::abs(new_phi(r) - phi(r)) / (1.0 + std::abs(phi(r))));
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      change = std::max(change, std::abs(new_mu(j) - mu(j)) / (1.0 + std::abs(mu(j))));
    }
    phi = new_phi;
    mu = new_mu;

    // Innovation variance from E[(u_i - sum phi_r u_{i-r})^2].
    const Eigen::VectorXd fit_now = a * mu;
    double rss = 0.0;
    double scale = 0.0;
    for (Eigen::Index i = p; i < n; ++i) {
      // Coefficient vector w over (u_i, u_{i-1}, ..., u_{i-p}).
      for (Eigen::Index r = 0; r <= p; ++r) {
        const double wr = r == 0 ? 1.0 : -phi(r - 1);
        for (Eigen::Index s = 0; s <= p; ++s) {
          const double ws = s == 0 ? 1.0 : -phi(s - 1);
          rss += wr * ws * u_second(i - r, i - s, fit_now);
        }
      }
      scale += u_second(i, i, fit_now);
    }
    const double count = static_cast<double>(n - p);
    proc.coefficients = phi;
    proc.regressor_coefficients = mu;
    proc.intercept = 0.0;
    proc.innovation_variance = floor_variance(rss, count, scale / count);
    if (change < options.tolerance) return proc;
  }
  throw FglsConvergenceError("FGLS did not converge in " +
                                 std::to_string(options.max_iterations) + " iterations",
                             proc);
}

ArProcess fit_fgls(const Eigen::VectorXd& series, const RegressorPanel& regs, int p,
                   const FglsOptions& options) {
  if (!series.allFinite()) throw Error(ErrorCode::Data, "FGLS: series has non-finite values");
  return fit_fgls(SeriesMoments{series, {}}, regs, p, options);
}

Eigen::VectorXd forecast(const ArProcess& proc, const Eigen::VectorXd& history, int horizon) {
  const int p = proc.order;
  if (horizon < 1) throw Error(ErrorCode::Dimension, "forecast horizon must be >= 1");
  if (history.size() < p) {
    throw Error(ErrorCode::Dimension, "forecast needs the last " + std::to_string(p) + " values");
  }
  if (proc.has_regressors()) {
    throw Error(ErrorCode::Dimension, "process has regressors; supply regressor rows");
  }
  // path holds the last p values followed by the forecasts.
  Eigen::VectorXd path(p + horizon);
  path.head(p) = history.tail(p);
  for (int h = 0; h < horizon; ++h) {
    double next = proc.intercept;
    for (int r = 1; r <= p; ++r) next += proc.coefficients(r - 1) * path(p + h - r);
    path(p + h) = next;
  }
  return path.tail(horizon);
}

Eigen::VectorXd forecast(const ArProcess& proc, const Eigen::VectorXd& history,
                         const Eigen::MatrixXd& history_regressors,
                         const Eigen::MatrixXd& future_regressors, int horizon) {
  if (!proc.has_regressors()) return forecast(proc, history, horizon);
  const int p = proc.order;
  const Eigen::VectorXd& mu = *proc.regressor_coefficients;
  if (horizon < 1) throw Error(ErrorCode::Dimension, "forecast horizon must be >= 1");
  if (history.size() < p || history_regressors.rows() != history.size() ||
      future_regressors.rows() < horizon || history_regressors.cols() != mu.size() ||
      future_regressors.cols() != mu.size()) {
    throw Error(ErrorCode::Dimension, "forecast: regressor rows do not match history/horizon");
  }
  Eigen::VectorXd dev(p + horizon);
  dev.head(p) = history.tail(p) - history_regressors.bottomRows(p) * mu;
  Eigen::VectorXd out(horizon);
  for (int h = 0; h < horizon; ++h) {
    double next = 0.0;
    for (int r = 1; r <= p; ++r) next += proc.coefficients(r - 1) * dev(p + h - r);
    dev(p + h) = next;
    out(h) = next + future_regressors.row(h).dot(mu);
  }
  return out;
}

double spectral_radius(const ArProcess& proc) {
  const int p = proc.order;
  if (proc.coefficients.size() != p) {
    throw Error(ErrorCode::Dimension, "AR coefficient count does not match the order");
  }
  if (p == 1) return std::abs(proc.coefficients(0));
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  companion.row(0) = proc.coefficients.transpose();
  companion.bottomLeftCorner(p - 1, p - 1).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stationary(const ArProcess& proc) {
  // Roots of 1 - sum phi_r z^r strictly outside |z| = 1 + 1e-10.
  return spectral_radius(proc) * (1.0 + 1e-10) < 1.0;
}

ArProcess shrink_to_stationary(const ArProcess& proc, double target) {
  const double rho = spectral_radius(proc);
  if (rho <= target) return proc;
  ArProcess out = proc;
  const double s = target / rho;
  double power = 1.0;
  for (int r = 0; r < proc.order; ++r) {
    power *= s;
    out.coefficients(r) *= power;
  }
  return out;
}

Eigen::VectorXd autocovariances(const ArProcess& proc, Eigen::Index max_lag) {
  if (!is_stationary(proc)) {
    throw Error(ErrorCode::NonStationary, "autocovariance requested for a non-stationary AR");
  }
  const int p = proc.order;
  const Eigen::VectorXd& phi = proc.coefficients;
  // gamma_0 - sum phi_r gamma_r = sigma^2; gamma_l - sum phi_r gamma_|l-r| = 0.
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(p + 1, p + 1);
  for (int l = 0; l <= p; ++l) {
    for (int r = 1; r <= p; ++r) system(l, std::abs(l - r)) -= phi(r - 1);
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 1);
  rhs(0) = proc.innovation_variance;
  const Eigen::VectorXd head = system.partialPivLu().solve(rhs);

  Eigen::VectorXd gamma(std::max<Eigen::Index>(max_lag + 1, p + 1));
  gamma.head(p + 1) = head;
  for (Eigen::Index l = p + 1; l < gamma.size(); ++l) {
    double v = 0.0;
    for (int r = 1; r <= p; ++r) v += phi(r - 1) * gamma(l - r);
    gamma(l) = v;
  }
  return gamma.head(max_lag + 1);
}

UnconditionalMoments unconditional_moments(const ArProcess& proc, Eigen::Index n) {
  if (n < 1) throw Error(ErrorCode::Dimension, "autocovariance size must be positive");
  const Eigen::VectorXd gamma = autocovariances(proc, n - 1);
  UnconditionalMoments out;
  out.mean = proc.has_regressors() ? 0.0 : proc.mean();
  out.autocovariance.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out.autocovariance(i, j) = gamma(std::abs(i - j));
  }
  return out;
}

Eigen::VectorXd mean_path(const ArProcess& proc, Eigen::Index n, const RegressorPanel* regs) {
  if (proc.has_regressors()) {
    if (regs == nullptr || regs->periods() < n) {
      throw Error(ErrorCode::Dimension, "mean path needs regressor rows for every period");
    }
    return regs->rows.topRows(n) * *proc.regressor_coefficients;
  }
  return Eigen::VectorXd::Constant(n, proc.mean());
}

}  // namespace fdfm
