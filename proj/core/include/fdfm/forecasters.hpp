#pragma once

// A small interface so the evaluation loops and the backtests treat every
// curve model the same way.

#include "fdfm/baselines.hpp"
#include "fdfm/model.hpp"
#include "fdfm/panel.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fdfm {

class CurveModel {
 public:
  virtual ~CurveModel() = default;
  virtual std::string name() const = 0;
  virtual void fit(const CurvePanel& panel) = 0;
  /// h-step-ahead curve at arbitrary maturities, same units as the fit panel.
  virtual Eigen::VectorXd forecast(int horizon, const std::vector<double>& maturities) const = 0;
  /// In-sample series at (possibly unobserved) maturities, n x L.
  virtual Eigen::MatrixXd synthesize(const std::vector<double>& maturities) const;
};

using ModelFactory = std::function<std::unique_ptr<CurveModel>()>;

class FdfmCurveModel : public CurveModel {
 public:
  explicit FdfmCurveModel(FdfmConfig config) : config_(std::move(config)) {}
  std::string name() const override { return "fdfm"; }
  void fit(const CurvePanel& panel) override;
  Eigen::VectorXd forecast(int horizon, const std::vector<double>& maturities) const override;
  Eigen::MatrixXd synthesize(const std::vector<double>& maturities) const override;
  const FdfmModel& model() const;

 private:
  FdfmConfig config_;
  std::optional<FdfmModel> model_;
};

class DnsCurveModel : public CurveModel {
 public:
  explicit DnsCurveModel(double alpha = kDnsAlpha) : alpha_(alpha) {}
  std::string name() const override { return "dns"; }
  void fit(const CurvePanel& panel) override;
  Eigen::VectorXd forecast(int horizon, const std::vector<double>& maturities) const override;
  Eigen::MatrixXd synthesize(const std::vector<double>& maturities) const override;
  const DnsModel& model() const;

 private:
  double alpha_;
  std::optional<DnsModel> model_;
};

class RandomWalkCurveModel : public CurveModel {
 public:
  std::string name() const override { return "rw"; }
  void fit(const CurvePanel& panel) override { panel_.emplace(panel); }
  Eigen::VectorXd forecast(int horizon, const std::vector<double>& maturities) const override;

 private:
  std::optional<CurvePanel> panel_;
};

/// Looks the realized curve up in the full panel (using the fitted slice's
/// origin). A test device for the trading accounting.
class PerfectForesightCurveModel : public CurveModel {
 public:
  explicit PerfectForesightCurveModel(CurvePanel full) : full_(std::move(full)) {}
  std::string name() const override { return "perfect"; }
  void fit(const CurvePanel& panel) override;
  Eigen::VectorXd forecast(int horizon, const std::vector<double>& maturities) const override;

 private:
  CurvePanel full_;
  std::size_t last_row_ = 0;
  bool fitted_ = false;
};

ModelFactory fdfm_factory(FdfmConfig config);
ModelFactory dns_factory(double alpha = kDnsAlpha);
ModelFactory rw_factory();
ModelFactory perfect_foresight_factory(CurvePanel full);

}  // namespace fdfm
