#include "fdfm/panel.hpp"

#include "fdfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdfm {

std::string_view to_string(YieldUnits units) noexcept {
  switch (units) {
    case YieldUnits::AnnualPercent: return "annual_percent";
    case YieldUnits::MonthlyDecimal: return "monthly_decimal";
  }
  return "unknown";
}

double convert_yield(double value, YieldUnits from, YieldUnits to) noexcept {
  if (from == to) return value;
  return from == YieldUnits::AnnualPercent ? value / 1200.0 : value * 1200.0;
}

CurvePanel::CurvePanel(Eigen::MatrixXd data, KnotGrid grid, std::vector<std::string> dates,
                       YieldUnits units, std::size_t origin)
    : data_(std::move(data)),
      grid_(std::move(grid)),
      dates_(std::move(dates)),
      units_(units),
      origin_(origin) {
  if (static_cast<std::size_t>(data_.cols()) != grid_.size()) {
    throw Error(ErrorCode::Dimension, "panel has " + std::to_string(data_.cols()) +
                                          " columns but the grid has " +
                                          std::to_string(grid_.size()) + " knots");
  }
  if (!dates_.empty() && static_cast<Eigen::Index>(dates_.size()) != data_.rows()) {
    throw Error(ErrorCode::Dimension, "panel date labels do not match the row count");
  }
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      if (!std::isfinite(data_(i, j))) {
        std::ostringstream os;
        os << "panel entry (" << i << ", " << j << ") is not finite";
        throw Error(ErrorCode::Data, os.str());
      }
    }
  }
}

CurvePanel CurvePanel::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > static_cast<std::size_t>(data_.rows())) {
    throw Error(ErrorCode::OutOfRange, "row slice outside the panel");
  }
  const auto b = static_cast<Eigen::Index>(begin);
  const auto len = static_cast<Eigen::Index>(end - begin);
  std::vector<std::string> dates;
  if (!dates_.empty()) dates.assign(dates_.begin() + b, dates_.begin() + b + len);
  return CurvePanel(data_.middleRows(b, len), grid_, std::move(dates), units_, origin_ + begin);
}

CurvePanel CurvePanel::select_columns(const std::vector<std::size_t>& columns) const {
  std::vector<double> knots;
  Eigen::MatrixXd data(data_.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] >= grid_.size() || (c > 0 && columns[c] <= columns[c - 1])) {
      throw Error(ErrorCode::Dimension, "column selection must be ascending and in range");
    }
    knots.push_back(grid_.knot(columns[c]));
    data.col(static_cast<Eigen::Index>(c)) = data_.col(static_cast<Eigen::Index>(columns[c]));
  }
  return CurvePanel(std::move(data), KnotGrid(std::move(knots)), dates_, units_, origin_);
}

CurvePanel CurvePanel::in_units(YieldUnits units) const {
  if (units == units_) return *this;
  const double factor = convert_yield(1.0, units_, units);
  return CurvePanel(data_ * factor, grid_, dates_, units, origin_);
}

double interpolate_linear(const std::vector<double>& knots, const Eigen::VectorXd& values,
                          double t) {
  if (knots.size() != static_cast<std::size_t>(values.size()) || knots.empty()) {
    throw Error(ErrorCode::Dimension, "interpolation: knots and values differ in length");
  }
  if (t < knots.front() || t > knots.back()) {
    std::ostringstream os;
    os << "maturity " << t << " outside observed range [" << knots.front() << ", "
       << knots.back() << "]";
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  auto it = std::lower_bound(knots.begin(), knots.end(), t);
  const auto j = static_cast<std::size_t>(it - knots.begin());
  if (knots[j] == t) return values(static_cast<Eigen::Index>(j));
  const double w = (t - knots[j - 1]) / (knots[j] - knots[j - 1]);
  return (1.0 - w) * values(static_cast<Eigen::Index>(j - 1)) +
         w * values(static_cast<Eigen::Index>(j));
}

}  // namespace fdfm
