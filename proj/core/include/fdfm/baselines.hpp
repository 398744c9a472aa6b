#pragma once

// Comparator models: two-step dynamic Nelson-Siegel and the random walk.

#include "fdfm/artime.hpp"
#include "fdfm/panel.hpp"
#include "fdfm/spline.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fdfm {

inline constexpr double kDnsAlpha = 0.0609;

struct DnsLoadings {
  double level = 1.0;
  double slope = 0.0;
  double curvature = 0.0;
};

/// f1 = 1, f2 = (1 - e^{-at})/(at), f3 = f2 - e^{-at}. Throws Domain for t <= 0.
DnsLoadings dns_loadings(double t, double alpha = kDnsAlpha);

struct DnsModel {
  double alpha = kDnsAlpha;
  Eigen::MatrixXd factor_series;  // n x 3
  std::vector<ArProcess> processes;
  KnotGrid grid;
};

/// Per-date OLS on the three loadings, then an AR(1) per factor series.
DnsModel dns_fit(const CurvePanel& panel, double alpha = kDnsAlpha);
/// Per-date cross-sectional OLS only (step 1); rows are dates.
Eigen::MatrixXd dns_cross_section(const CurvePanel& panel, double alpha = kDnsAlpha);
/// m x 3 design matrix of the loadings at the given maturities.
Eigen::MatrixXd dns_design(const std::vector<double>& maturities, double alpha = kDnsAlpha);

Eigen::VectorXd dns_forecast(const DnsModel& model, int horizon,
                             const std::vector<double>& eval_points);
/// Fitted factor series times loadings at the given maturities (n x L).
Eigen::MatrixXd dns_synthesize(const DnsModel& model, const std::vector<double>& maturities);

/// Last observed value at column j, for any horizon.
double rw_forecast(const CurvePanel& panel, int horizon, std::size_t j);
/// Last observed curve, linearly interpolated at the requested maturities.
Eigen::VectorXd rw_forecast_curve(const CurvePanel& panel, int horizon,
                                  const std::vector<double>& eval_points);

}  // namespace fdfm
