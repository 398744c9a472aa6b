#include "fdfm/baselines.hpp"

#include "fdfm/errors.hpp"

#include <cmath>

namespace fdfm {

DnsLoadings dns_loadings(double t, double alpha) {
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::Domain, "maturity must be positive");
  if (!(alpha > 0.0)) throw Error(ErrorCode::Domain, "alpha must be positive");
  const double x = alpha * t;
  const double decay = std::exp(-x);
  // -expm1(-x) keeps f2 accurate as t -> 0
  const double f2 = -std::expm1(-x) / x;
  return DnsLoadings{1.0, f2, f2 - decay};
}

Eigen::MatrixXd dns_design(const std::vector<double>& maturities, double alpha) {
  Eigen::MatrixXd d(maturities.size(), 3);
  for (std::size_t j = 0; j < maturities.size(); ++j) {
    const auto f = dns_loadings(maturities[j], alpha);
    d.row(j) << f.level, f.slope, f.curvature;
  }
  return d;
}

Eigen::MatrixXd dns_cross_section(const CurvePanel& panel, double alpha) {
  if (panel.maturities() < 3) throw Error(ErrorCode::RankDeficiency, "DNS needs three maturities");
  const Eigen::MatrixXd d = dns_design(panel.grid().knots(), alpha);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw Error(ErrorCode::RankDeficiency, "DNS design is collinear on this grid");
  return qr.solve(panel.data().transpose()).transpose();
}

DnsModel dns_fit(const CurvePanel& panel, double alpha) {
  DnsModel model{alpha, dns_cross_section(panel, alpha), {}, panel.grid()};
  for (int k = 0; k < 3; ++k) model.processes.push_back(fit_ols(Eigen::VectorXd(model.factor_series.col(k)), 1));
  return model;
}

Eigen::VectorXd dns_forecast(const DnsModel& model, int horizon,
                             const std::vector<double>& eval_points) {
  if (horizon < 1) throw Error(ErrorCode::Domain, "forecast horizon must be at least 1");
  Eigen::Vector3d beta;
  for (int k = 0; k < 3; ++k)
    beta(k) = forecast(model.processes[k], model.factor_series.col(k), horizon)(horizon - 1);
  return dns_design(eval_points, model.alpha) * beta;
}

Eigen::MatrixXd dns_synthesize(const DnsModel& model, const std::vector<double>& maturities) {
  return model.factor_series * dns_design(maturities, model.alpha).transpose();
}

double rw_forecast(const CurvePanel& panel, int horizon, std::size_t j) {
  if (horizon < 1) throw Error(ErrorCode::Domain, "forecast horizon must be at least 1");
  if (j >= static_cast<std::size_t>(panel.maturities()))
    throw Error(ErrorCode::OutOfRange, "maturity index out of range");
  return panel.data()(panel.periods() - 1, static_cast<Eigen::Index>(j));
}

Eigen::VectorXd rw_forecast_curve(const CurvePanel& panel, int horizon,
                                  const std::vector<double>& eval_points) {
  if (horizon < 1) throw Error(ErrorCode::Domain, "forecast horizon must be at least 1");
  const Eigen::VectorXd last = panel.data().row(panel.periods() - 1).transpose();
  Eigen::VectorXd out(eval_points.size());
  for (std::size_t j = 0; j < eval_points.size(); ++j)
    out(j) = interpolate_linear(panel.grid().knots(), last, eval_points[j]);
  return out;
}

}  // namespace fdfm
