#pragma once

#include "fdfm/spline.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fdfm {

// Yields are read as annualized percent. Pricing works with per-month
// continuously compounded decimals so that P = exp(-t x) with t in months.
enum class YieldUnits { AnnualPercent, MonthlyDecimal };

std::string_view to_string(YieldUnits units) noexcept;
double convert_yield(double value, YieldUnits from, YieldUnits to) noexcept;

/// n x m panel of curves sampled on a knot grid; row i is the curve at date i.
class CurvePanel {
 public:
  CurvePanel(Eigen::MatrixXd data, KnotGrid grid, std::vector<std::string> dates = {},
             YieldUnits units = YieldUnits::AnnualPercent, std::size_t origin = 0);

  const Eigen::MatrixXd& data() const noexcept { return data_; }
  const KnotGrid& grid() const noexcept { return grid_; }
  const std::vector<std::string>& dates() const noexcept { return dates_; }
  bool has_dates() const noexcept { return !dates_.empty(); }
  YieldUnits units() const noexcept { return units_; }
  /// Absolute row index of row 0 in the panel this one was sliced from.
  std::size_t origin() const noexcept { return origin_; }

  Eigen::Index periods() const noexcept { return data_.rows(); }
  Eigen::Index maturities() const noexcept { return data_.cols(); }

  /// Rows [begin, end), keeping dates and advancing the origin.
  CurvePanel slice_rows(std::size_t begin, std::size_t end) const;
  /// Keeps the listed columns (ascending indices).
  CurvePanel select_columns(const std::vector<std::size_t>& columns) const;
  CurvePanel in_units(YieldUnits units) const;

 private:
  Eigen::MatrixXd data_;
  KnotGrid grid_;
  std::vector<std::string> dates_;
  YieldUnits units_;
  std::size_t origin_;
};

/// Piecewise-linear interpolation of one observed curve; OutOfRange outside
/// [first knot, last knot].
double interpolate_linear(const std::vector<double>& knots, const Eigen::VectorXd& values,
                          double t);

}  // namespace fdfm
