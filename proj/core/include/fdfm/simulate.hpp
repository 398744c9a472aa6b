#pragma once

// Synthetic panels from a known factor model, for recovery checks.

#include "fdfm/artime.hpp"
#include "fdfm/model.hpp"
#include "fdfm/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace fdfm {

struct SimulationSpec {
  int factors = 2;
  Eigen::Index periods = 300;
  Eigen::Index maturities = 20;
  std::vector<double> phi{0.8, 0.5};          // AR(1) coefficient per factor
  std::vector<double> innovation_sd{1.0, 1.0};
  std::vector<double> means{};                // default zero
  double noise_sd = 0.1;
  int burn_in = 200;
  double first_maturity = 1.0;
  double last_maturity = 120.0;
  std::uint64_t seed = 7;
};

struct SimulatedPanel {
  CurvePanel panel;
  Eigen::MatrixXd loadings;  // K x m, orthonormal rows, canonical signs
  Eigen::MatrixXd factors;   // n x K
  std::vector<ArProcess> processes;
};

/// Evenly spaced knots between the first and last maturity.
KnotGrid simulation_grid(const SimulationSpec& spec);
/// sin(k pi u / 1.5 + pi / 6) on the rescaled knots, then Gram-Schmidt.
Eigen::MatrixXd sinusoidal_loadings(const KnotGrid& grid, int factors);

SimulatedPanel simulate_panel(const SimulationSpec& spec);

/// New scores from the model's AR processes and loadings on its own grid.
CurvePanel simulate_from_model(const FdfmModel& model, Eigen::Index periods, double noise_sd,
                               std::uint64_t seed, int burn_in = 200);

}  // namespace fdfm
