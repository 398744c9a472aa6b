#pragma once

// Rolling-window forecast evaluation and the column-deletion synthesis study.

#include "fdfm/forecasters.hpp"
#include "fdfm/panel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace fdfm {

struct ForecastMetrics {
  double mfe = 0.0;
  double rmsfe = 0.0;
  std::optional<double> mape;  // percent; empty when some actual is zero
};

/// errors are actual - forecast.
ForecastMetrics metrics(const Eigen::VectorXd& errors, const Eigen::VectorXd& actuals);

struct RollingSpec {
  std::size_t window = 108;
  std::vector<int> horizons{1, 6, 12};
  /// Maturities below this are left out of the tables.
  double min_maturity = 3.0;
};

/// Number of forecasts per horizon: n - window - h + 1.
std::vector<std::size_t> rolling_counts(Eigen::Index periods, const RollingSpec& spec);

struct MetricRow {
  std::string model;
  int horizon = 1;
  double maturity = 0.0;
  std::size_t count = 0;
  ForecastMetrics metrics;
};

struct MetricTable {
  std::vector<MetricRow> rows;
  const MetricRow* find(const std::string& model, int horizon, double maturity) const;
};

/// Fits once per start s and forecasts every horizon whose target row exists.
/// Throws Window when the panel is too short.
MetricTable rolling_forecast_eval(const CurvePanel& panel, const ModelFactory& factory,
                                  const RollingSpec& spec = {});

struct SynthesisSpec {
  int deleted = 1;       // L consecutive columns
  int min_retained = 4;  // K + 1 for the default three-factor model
};

struct SynthesisResult {
  std::string model;
  std::vector<double> maturities;
  /// Mean over deletion windows of the per-window RMSFE, NaN if never withheld.
  Eigen::VectorXd rmsfe_all;
  /// Same, counting only windows where the maturity was inside the retained range.
  Eigen::VectorXd rmsfe_interior;
  std::vector<int> windows_all;
  std::vector<int> windows_interior;
};

/// Throws InfeasibleStudy for L outside [1, 8] or too few retained columns.
SynthesisResult synthesis_study(const CurvePanel& panel, const ModelFactory& factory,
                                const SynthesisSpec& spec);

struct BucketValues {
  double short_end = 0.0;  // [1.5, 21)
  double mid = 0.0;        // [21, 36]
  double long_end = 0.0;   // (36, 120]
  double all = 0.0;
};

struct SynthesisRatioTable {
  int deleted = 1;
  BucketValues with_extrapolation;
  BucketValues without_extrapolation;
};

/// Bucket means of a per-maturity series; NaN entries are skipped.
BucketValues bucket_means(const std::vector<double>& maturities, const Eigen::VectorXd& values);
/// numerator / denominator bucket ratios.
SynthesisRatioTable synthesis_ratios(const SynthesisResult& numerator,
                                     const SynthesisResult& denominator);
SynthesisRatioTable curve_synthesis_eval(const CurvePanel& panel, const ModelFactory& numerator,
                                         const ModelFactory& denominator,
                                         const SynthesisSpec& spec);

}  // namespace fdfm
