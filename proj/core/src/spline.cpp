#include "fdfm/spline.hpp"

#include "fdfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdfm {

KnotGrid::KnotGrid(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 3) {
    throw Error(ErrorCode::TooFewKnots, "knot grid needs at least 3 knots, got " +
                                            std::to_string(knots_.size()));
  }
  for (std::size_t j = 0; j < knots_.size(); ++j) {
    if (!std::isfinite(knots_[j])) {
      throw Error(ErrorCode::InvalidGrid, "knot " + std::to_string(j) + " is not finite");
    }
    if (j > 0 && !(knots_[j] > knots_[j - 1])) {
      std::ostringstream os;
      os << "knots must be strictly increasing (t[" << j - 1 << "]=" << knots_[j - 1]
         << ", t[" << j << "]=" << knots_[j] << ")";
      throw Error(ErrorCode::InvalidGrid, os.str());
    }
  }
}

Eigen::VectorXd KnotGrid::as_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(knots_.data(), static_cast<Eigen::Index>(knots_.size()));
}

Eigen::VectorXd solve_tridiagonal(const Eigen::VectorXd& lower, const Eigen::VectorXd& diag,
                                  const Eigen::VectorXd& upper, const Eigen::VectorXd& rhs) {
  const Eigen::Index n = diag.size();
  if (rhs.size() != n || (n > 0 && (lower.size() != n - 1 || upper.size() != n - 1))) {
    throw Error(ErrorCode::Dimension, "tridiagonal system has inconsistent sizes");
  }
  // Thomas algorithm; R is strictly diagonally dominant so no pivoting is needed.
  Eigen::VectorXd c(n), d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sub = i > 0 ? lower(i - 1) : 0.0;
    const double denom = diag(i) - (i > 0 ? sub * c(i - 1) : 0.0);
    if (denom == 0.0) {
      throw Error(ErrorCode::NumericalSingularity, "zero pivot in tridiagonal solve");
    }
    c(i) = i + 1 < n ? upper(i) / denom : 0.0;
    d(i) = (rhs(i) - (i > 0 ? sub * d(i - 1) : 0.0)) / denom;
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    x(i) = d(i) - (i + 1 < n ? c(i) * x(i + 1) : 0.0);
  }
  return x;
}

namespace {

struct Tridiagonal {
  Eigen::VectorXd lower, diag, upper;
};

Tridiagonal r_bands(const KnotGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Tridiagonal r{Eigen::VectorXd(m - 3), Eigen::VectorXd(m - 2), Eigen::VectorXd(m - 3)};
  for (Eigen::Index c = 0; c < m - 2; ++c) {
    const auto j = static_cast<std::size_t>(c + 1);
    r.diag(c) = (grid.gap(j - 1) + grid.gap(j)) / 3.0;
    if (c + 1 < m - 2) {
      r.upper(c) = grid.gap(j) / 6.0;
      r.lower(c) = r.upper(c);
    }
  }
  return r;
}

// Q' v for the banded Q, without forming Q.
Eigen::VectorXd q_transpose_times(const KnotGrid& grid, const Eigen::VectorXd& v) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd out(m - 2);
  for (Eigen::Index c = 0; c < m - 2; ++c) {
    const auto j = static_cast<std::size_t>(c + 1);
    const double a = 1.0 / grid.gap(j - 1);
    const double b = 1.0 / grid.gap(j);
    out(c) = a * v(c) - (a + b) * v(c + 1) + b * v(c + 2);
  }
  return out;
}

}  // namespace

PenaltyOperator::PenaltyOperator(const KnotGrid& grid) : grid_(grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  q_ = Eigen::MatrixXd::Zero(m, m - 2);
  r_ = Eigen::MatrixXd::Zero(m - 2, m - 2);
  const Tridiagonal bands = r_bands(grid);
  for (Eigen::Index c = 0; c < m - 2; ++c) {
    const auto j = static_cast<std::size_t>(c + 1);
    q_(c, c) = 1.0 / grid.gap(j - 1);
    q_(c + 1, c) = -1.0 / grid.gap(j - 1) - 1.0 / grid.gap(j);
    q_(c + 2, c) = 1.0 / grid.gap(j);
    r_(c, c) = bands.diag(c);
    if (c + 1 < m - 2) {
      r_(c, c + 1) = bands.upper(c);
      r_(c + 1, c) = bands.upper(c);
    }
  }

  // R^{-1} Q' one column at a time through the banded solver.
  Eigen::MatrixXd rinv_qt(m - 2, m);
  const Eigen::MatrixXd qt = q_.transpose();
  for (Eigen::Index col = 0; col < m; ++col) {
    rinv_qt.col(col) = solve_tridiagonal(bands.lower, bands.diag, bands.upper, qt.col(col));
  }
  omega_ = q_ * rinv_qt;
  omega_ = 0.5 * (omega_ + omega_.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(omega_);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalSingularity, "eigendecomposition of the penalty failed");
  }
  eigenvectors_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues();
}

std::size_t PenaltyOperator::null_space_dimension() const {
  const double cutoff = 1e-12 * eigenvalues_.cwiseAbs().maxCoeff();
  return static_cast<std::size_t>((eigenvalues_.array() < cutoff).count());
}

PenaltyOperator build_penalty(const KnotGrid& grid) { return PenaltyOperator(grid); }

NaturalCubicSpline::NaturalCubicSpline(KnotGrid grid, Eigen::VectorXd values,
                                       Eigen::VectorXd second_derivatives)
    : grid_(std::move(grid)), values_(std::move(values)), gamma_(std::move(second_derivatives)) {
  const auto m = static_cast<Eigen::Index>(grid_.size());
  if (values_.size() != m || gamma_.size() != m) {
    throw Error(ErrorCode::Dimension, "spline values and second derivatives must match the grid");
  }
}

double NaturalCubicSpline::left_slope() const {
  const double h = grid_.gap(0);
  return (values_(1) - values_(0)) / h - h / 6.0 * (2.0 * gamma_(0) + gamma_(1));
}

double NaturalCubicSpline::right_slope() const {
  const auto m = values_.size();
  const double h = grid_.gap(static_cast<std::size_t>(m - 2));
  return (values_(m - 1) - values_(m - 2)) / h + h / 6.0 * (gamma_(m - 2) + 2.0 * gamma_(m - 1));
}

double NaturalCubicSpline::operator()(double t) const {
  const auto& knots = grid_.knots();
  const auto m = knots.size();
  if (t < knots.front()) return values_(0) + (t - knots.front()) * left_slope();
  if (t > knots.back()) {
    return values_(static_cast<Eigen::Index>(m - 1)) + (t - knots.back()) * right_slope();
  }
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  std::size_t j = it == knots.end() ? m - 2 : static_cast<std::size_t>(it - knots.begin()) - 1;
  j = std::min(j, m - 2);
  const auto jj = static_cast<Eigen::Index>(j);
  const double h = grid_.gap(j);
  const double a = t - knots[j];
  const double b = knots[j + 1] - t;
  const double linear = (a * values_(jj + 1) + b * values_(jj)) / h;
  const double curvature =
      a * b / 6.0 * ((1.0 + a / h) * gamma_(jj + 1) + (1.0 + b / h) * gamma_(jj));
  return linear - curvature;
}

NaturalCubicSpline complete_spline(const Eigen::VectorXd& values, const KnotGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (values.size() != m) {
    throw Error(ErrorCode::Dimension, "spline completion: expected " + std::to_string(m) +
                                          " values, got " + std::to_string(values.size()));
  }
  const Tridiagonal bands = r_bands(grid);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(m);
  gamma.segment(1, m - 2) =
      solve_tridiagonal(bands.lower, bands.diag, bands.upper, q_transpose_times(grid, values));
  return NaturalCubicSpline(grid, values, std::move(gamma));
}

double evaluate(const NaturalCubicSpline& spline, double t) { return spline(t); }

double roughness(const NaturalCubicSpline& spline, const PenaltyOperator& penalty) {
  if (!(spline.grid() == penalty.grid())) {
    throw Error(ErrorCode::Dimension, "spline and penalty are defined on different grids");
  }
  const Eigen::VectorXd& f = spline.values();
  return std::max(0.0, f.dot(penalty.omega() * f));
}

}  // namespace fdfm
