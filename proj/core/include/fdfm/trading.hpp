#pragma once

// Zero-coupon bond returns and the three pairs-trading backtests.
// Yields are per-month continuously compounded decimals, so P = exp(-t x)
// with t in months.

#include "fdfm/forecasters.hpp"
#include "fdfm/panel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fdfm {

inline constexpr double kDefaultStake = 1e6;

double bond_price(double maturity, double yield);
/// r = t x_now - (t-1) x_next. Throws Maturity for t < 2.
double log_return(double x_now, double x_next, double t);
/// R = P_next(t-1) / P_now(t) - 1.
double simple_return(double x_now, double x_next, double t);
/// Linear interpolation of an observed curve; OutOfRange outside the knots.
double interpolate_yield(const KnotGrid& grid, const Eigen::VectorXd& curve, double t);

std::vector<int> algo1_maturities();  // 4..13, 16..85 step 3
std::vector<int> algo2_maturities();  // 4, 7, ..., 25, 31, 37, 49, 61, 73, 85
std::vector<int> algo3_maturities();  // algo2 plus 97, 109

enum class ReturnForm { Log, Simple };

/// Stage 1: one row per trading period i (model fitted on the `window` rows
/// ending at i), predicted and realized returns from i to i+1 for every
/// maturity in the universe.
struct ReturnTable {
  std::string model;
  std::vector<int> maturities;
  std::vector<std::size_t> rows;    // panel row i
  std::vector<std::string> labels;  // date of row i+1, or its index
  Eigen::MatrixXd predicted;        // r-hat, periods x maturities
  Eigen::MatrixXd realized_log;     // r
  Eigen::MatrixXd realized_simple;  // R

  Eigen::Index periods() const noexcept { return predicted.rows(); }
  Eigen::Index column(int maturity) const;
};

/// The panel may be in either unit; models are fitted in the panel's units and
/// their forecasts converted to per-month decimals.
ReturnTable build_return_table(const CurvePanel& panel, const ModelFactory& factory,
                               const std::vector<int>& maturities, std::size_t window = 108);

struct TradingOptions {
  double stake = kDefaultStake;
  ReturnForm returns = ReturnForm::Log;
  /// Negates every predicted spread (antisymmetry checks).
  bool invert_signals = false;
};

struct LedgerEntry {
  std::string label;
  std::size_t period = 0;
  int t1 = 0;
  int t2 = 0;
  double stake = 0.0;  // signed d
  double predicted_spread = 0.0;
  double realized_spread = 0.0;
  double profit = 0.0;
};

struct DirectionalCounts {
  int positive_total = 0;
  int positive_hits = 0;
  int negative_total = 0;
  int negative_hits = 0;
};

struct TradingLedger {
  std::string model;
  std::vector<LedgerEntry> entries;
  std::vector<double> period_profits;
  double cumulative = 0.0;
  DirectionalCounts directional;
};

/// Rows whose dates fall in [begin, end] (YYYY-MM); the first `window` rows
/// when the panel has no dates or none match.
std::pair<std::size_t, std::size_t> weight_rows(const CurvePanel& panel, std::size_t window,
                                                const std::string& begin = "1985-01",
                                                const std::string& end = "1993-12");
/// Historical absolute excess simple-return weights, summing to one.
Eigen::VectorXd algo1_weights(const CurvePanel& panel, int t1, const std::vector<int>& t2s,
                              std::pair<std::size_t, std::size_t> rows);

TradingLedger algo1_weighted_pairs(const ReturnTable& table, int t1, const std::vector<int>& t2s,
                                   const Eigen::VectorXd& weights,
                                   const TradingOptions& options = {});
/// Each period trades the t2 in `universe` minus t1 with the largest absolute
/// predicted spread; ties go to the smaller t2.
TradingLedger algo2_optimal_pairs(const ReturnTable& table, int t1,
                                  const std::vector<int>& universe,
                                  const TradingOptions& options = {});
TradingLedger fixed_pair(const ReturnTable& table, int t1, int t2,
                         const TradingOptions& options = {});

struct PairGrid {
  std::string model;
  std::vector<int> maturities;
  Eigen::MatrixXd cumulative;  // (t1, t2) entry; NaN unless t1 < t2
};
PairGrid algo3_fixed_pairs(const ReturnTable& table, const std::vector<int>& universe,
                           const TradingOptions& options = {});

/// Index of the model with the largest cumulative profit per cell, -1 off the
/// upper triangle.
Eigen::MatrixXi winner_grid(const std::vector<PairGrid>& grids);

/// End-to-end wrappers over the rolling window.
TradingLedger algo1_weighted_pairs(const CurvePanel& panel, const ModelFactory& factory,
                                   std::size_t window = 108, const TradingOptions& options = {});
TradingLedger algo2_optimal_pairs(const CurvePanel& panel, const ModelFactory& factory, int t1,
                                  std::size_t window = 108, const TradingOptions& options = {});
PairGrid algo3_fixed_pairs(const CurvePanel& panel, const ModelFactory& factory,
                           std::size_t window = 108, const TradingOptions& options = {});

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double q);

struct TradingSummary {
  double cumulative = 0.0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  DirectionalCounts directional;
};
/// Percentiles are over per-period portfolio profits.
TradingSummary summarize(const TradingLedger& ledger);

}  // namespace fdfm
