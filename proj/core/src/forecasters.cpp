#include "fdfm/forecasters.hpp"

#include "fdfm/errors.hpp"

namespace fdfm {

namespace {
[[noreturn]] void not_fitted(const std::string& name) {
  throw Error(ErrorCode::Usage, name + " model used before fit");
}
}  // namespace

Eigen::MatrixXd CurveModel::synthesize(const std::vector<double>&) const {
  throw Error(ErrorCode::Usage, name() + " does not support curve synthesis");
}

void FdfmCurveModel::fit(const CurvePanel& panel) { model_ = fdfm::fit(panel, config_); }

const FdfmModel& FdfmCurveModel::model() const {
  if (!model_) not_fitted(name());
  return *model_;
}

Eigen::VectorXd FdfmCurveModel::forecast(int horizon, const std::vector<double>& maturities) const {
  return forecast_curve(model(), horizon, maturities).values;
}

Eigen::MatrixXd FdfmCurveModel::synthesize(const std::vector<double>& maturities) const {
  const auto& m = model();
  Eigen::MatrixXd out(m.periods(), maturities.size());
  for (std::size_t j = 0; j < maturities.size(); ++j)
    out.col(j) = synthesize_series(m, maturities[j]).values;
  return out;
}

void DnsCurveModel::fit(const CurvePanel& panel) { model_ = dns_fit(panel, alpha_); }

const DnsModel& DnsCurveModel::model() const {
  if (!model_) not_fitted(name());
  return *model_;
}

Eigen::VectorXd DnsCurveModel::forecast(int horizon, const std::vector<double>& maturities) const {
  return dns_forecast(model(), horizon, maturities);
}

Eigen::MatrixXd DnsCurveModel::synthesize(const std::vector<double>& maturities) const {
  return dns_synthesize(model(), maturities);
}

Eigen::VectorXd RandomWalkCurveModel::forecast(int horizon,
                                               const std::vector<double>& maturities) const {
  if (!panel_) not_fitted(name());
  return rw_forecast_curve(*panel_, horizon, maturities);
}

void PerfectForesightCurveModel::fit(const CurvePanel& panel) {
  last_row_ = panel.origin() + static_cast<std::size_t>(panel.periods()) - 1;
  fitted_ = true;
}

Eigen::VectorXd PerfectForesightCurveModel::forecast(int horizon,
                                                     const std::vector<double>& maturities) const {
  if (!fitted_) not_fitted(name());
  const auto row = last_row_ + static_cast<std::size_t>(horizon);
  if (horizon < 1 || row >= static_cast<std::size_t>(full_.periods()))
    throw Error(ErrorCode::OutOfRange, "perfect foresight beyond the end of the panel");
  const Eigen::VectorXd actual = full_.data().row(static_cast<Eigen::Index>(row)).transpose();
  Eigen::VectorXd out(maturities.size());
  for (std::size_t j = 0; j < maturities.size(); ++j)
    out(j) = interpolate_linear(full_.grid().knots(), actual, maturities[j]);
  return out;
}

ModelFactory fdfm_factory(FdfmConfig config) {
  return [config] { return std::make_unique<FdfmCurveModel>(config); };
}
ModelFactory dns_factory(double alpha) {
  return [alpha] { return std::make_unique<DnsCurveModel>(alpha); };
}
ModelFactory rw_factory() {
  return [] { return std::make_unique<RandomWalkCurveModel>(); };
}
ModelFactory perfect_foresight_factory(CurvePanel full) {
  return [full] { return std::make_unique<PerfectForesightCurveModel>(full); };
}

}  // namespace fdfm
