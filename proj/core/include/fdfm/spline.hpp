#pragma once

// Natural cubic spline machinery on a fixed knot grid: the roughness penalty
// Omega = Q R^{-1} Q', spline completion from knot values, evaluation with
// linear extension beyond the boundary knots, and roughness.

#include <Eigen/Dense>

#include <vector>

namespace fdfm {

class KnotGrid {
 public:
  /// Throws InvalidGrid for non-finite or non-increasing knots and
  /// TooFewKnots when fewer than three are given.
  explicit KnotGrid(std::vector<double> knots);

  std::size_t size() const noexcept { return knots_.size(); }
  const std::vector<double>& knots() const noexcept { return knots_; }
  double knot(std::size_t j) const { return knots_[j]; }
  /// h_j = t_{j+1} - t_j, j = 0..m-2.
  double gap(std::size_t j) const { return knots_[j + 1] - knots_[j]; }
  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }
  bool contains(double t) const { return t >= front() && t <= back(); }

  Eigen::VectorXd as_vector() const;

  friend bool operator==(const KnotGrid&, const KnotGrid&) = default;

 private:
  std::vector<double> knots_;
};

/// Q is m x (m-2) (column c holds interior knot c+1), R is the tridiagonal
/// (m-2) x (m-2) Gram matrix of the hat-function second derivatives, and
/// Omega = Q R^{-1} Q'. The eigendecomposition of Omega is computed once.
class PenaltyOperator {
 public:
  explicit PenaltyOperator(const KnotGrid& grid);

  const KnotGrid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& q() const noexcept { return q_; }
  const Eigen::MatrixXd& r() const noexcept { return r_; }
  const Eigen::MatrixXd& omega() const noexcept { return omega_; }
  /// Columns are orthonormal eigenvectors, eigenvalues ascending.
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }

  /// Number of eigenvalues below 1e-12 * max eigenvalue.
  std::size_t null_space_dimension() const;

 private:
  KnotGrid grid_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  Eigen::MatrixXd omega_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd eigenvalues_;
};

PenaltyOperator build_penalty(const KnotGrid& grid);

/// Solves a tridiagonal system with sub-diagonal `lower`, diagonal `diag` and
/// super-diagonal `upper` (both off-diagonals have size n-1).
Eigen::VectorXd solve_tridiagonal(const Eigen::VectorXd& lower,
                                  const Eigen::VectorXd& diag,
                                  const Eigen::VectorXd& upper,
                                  const Eigen::VectorXd& rhs);

class NaturalCubicSpline {
 public:
  NaturalCubicSpline(KnotGrid grid, Eigen::VectorXd values,
                     Eigen::VectorXd second_derivatives);

  const KnotGrid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  const Eigen::VectorXd& second_derivatives() const noexcept { return gamma_; }

  double operator()(double t) const;
  /// First derivative at a boundary knot; used for the linear extension.
  double left_slope() const;
  double right_slope() const;

 private:
  KnotGrid grid_;
  Eigen::VectorXd values_;
  Eigen::VectorXd gamma_;
};

/// The unique natural cubic spline interpolating `values` at the grid knots.
NaturalCubicSpline complete_spline(const Eigen::VectorXd& values, const KnotGrid& grid);

/// Piecewise-cubic inside [t_1, t_m], linear with the boundary slope outside.
double evaluate(const NaturalCubicSpline& spline, double t);

/// values' Omega values, the integrated squared second derivative.
double roughness(const NaturalCubicSpline& spline, const PenaltyOperator& penalty);

}  // namespace fdfm
