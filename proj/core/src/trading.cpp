#include "fdfm/trading.hpp"

#include "fdfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdfm {

double bond_price(double maturity, double yield) { return std::exp(-maturity * yield); }

double log_return(double x_now, double x_next, double t) {
  if (!(t >= 2.0)) throw Error(ErrorCode::Maturity, "one-period return needs maturity >= 2");
  return t * x_now - (t - 1.0) * x_next;
}

double simple_return(double x_now, double x_next, double t) {
  // expm1 keeps R accurate for small returns so ln(1+R) = r holds tightly.
  return std::expm1(log_return(x_now, x_next, t));
}

double interpolate_yield(const KnotGrid& grid, const Eigen::VectorXd& curve, double t) {
  return interpolate_linear(grid.knots(), curve, t);
}

std::vector<int> algo1_maturities() {
  std::vector<int> out;
  for (int t = 4; t <= 13; ++t) out.push_back(t);
  for (int t = 16; t <= 85; t += 3) out.push_back(t);
  return out;
}

std::vector<int> algo2_maturities() { return {4, 7, 10, 13, 16, 19, 22, 25, 31, 37, 49, 61, 73, 85}; }

std::vector<int> algo3_maturities() {
  auto out = algo2_maturities();
  out.push_back(97);
  out.push_back(109);
  return out;
}

Eigen::Index ReturnTable::column(int maturity) const {
  const auto it = std::find(maturities.begin(), maturities.end(), maturity);
  if (it == maturities.end())
    throw Error(ErrorCode::Maturity, "maturity " + std::to_string(maturity) + " not in the table");
  return it - maturities.begin();
}

namespace {

double to_decimal(double v, YieldUnits u) { return convert_yield(v, u, YieldUnits::MonthlyDecimal); }

Eigen::VectorXd decimal_row(const CurvePanel& panel, std::size_t i) {
  Eigen::VectorXd row = panel.data().row(static_cast<Eigen::Index>(i)).transpose();
  for (Eigen::Index j = 0; j < row.size(); ++j) row(j) = to_decimal(row(j), panel.units());
  return row;
}

void check_coverage(const KnotGrid& grid, const std::vector<int>& maturities) {
  for (int t : maturities) {
    if (t < 2) throw Error(ErrorCode::Maturity, "trading maturities must be at least 2");
    if (!grid.contains(t) || !grid.contains(t - 1.0))
      throw Error(ErrorCode::Data, "maturity " + std::to_string(t) +
                                       " is outside the observed range after interpolation");
  }
}

}  // namespace

ReturnTable build_return_table(const CurvePanel& panel, const ModelFactory& factory,
                               const std::vector<int>& maturities, std::size_t window) {
  const auto n = static_cast<std::size_t>(panel.periods());
  if (window < 1 || n < window + 1) throw Error(ErrorCode::Window, "panel too short for trading");
  check_coverage(panel.grid(), maturities);
  const auto P = n - window;
  const auto U = maturities.size();
  ReturnTable table;
  table.maturities = maturities;
  table.predicted.resize(P, U);
  table.realized_log.resize(P, U);
  table.realized_simple.resize(P, U);
  std::vector<double> shorter(U);
  for (std::size_t u = 0; u < U; ++u) shorter[u] = maturities[u] - 1.0;

  for (std::size_t s = 0; s < P; ++s) {
    const std::size_t i = s + window - 1;
    auto model = factory();
    table.model = model->name();
    model->fit(panel.slice_rows(s, s + window));
    const Eigen::VectorXd fc = model->forecast(1, shorter);
    const Eigen::VectorXd now = decimal_row(panel, i);
    const Eigen::VectorXd next = decimal_row(panel, i + 1);
    for (std::size_t u = 0; u < U; ++u) {
      const double t = maturities[u];
      const double x_now = interpolate_yield(panel.grid(), now, t);
      const double x_next = interpolate_yield(panel.grid(), next, t - 1.0);
      const double x_hat = to_decimal(fc(static_cast<Eigen::Index>(u)), panel.units());
      table.predicted(s, u) = log_return(x_now, x_hat, t);
      table.realized_log(s, u) = log_return(x_now, x_next, t);
      table.realized_simple(s, u) = simple_return(x_now, x_next, t);
    }
    table.rows.push_back(i);
    table.labels.push_back(panel.has_dates() ? panel.dates()[i + 1] : std::to_string(i + 1));
  }
  return table;
}

std::pair<std::size_t, std::size_t> weight_rows(const CurvePanel& panel, std::size_t window,
                                                const std::string& begin, const std::string& end) {
  const auto n = static_cast<std::size_t>(panel.periods());
  if (panel.has_dates()) {
    std::size_t lo = n, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& d = panel.dates()[i];
      if (d >= begin && d <= end) {
        lo = std::min(lo, i);
        hi = std::max(hi, i + 1);
      }
    }
    if (lo < hi) return {lo, hi};
  }
  return {0, std::min(window, n)};
}

Eigen::VectorXd algo1_weights(const CurvePanel& panel, int t1, const std::vector<int>& t2s,
                              std::pair<std::size_t, std::size_t> rows) {
  check_coverage(panel.grid(), {t1});
  check_coverage(panel.grid(), t2s);
  if (rows.second > static_cast<std::size_t>(panel.periods()) || rows.second < rows.first + 2)
    throw Error(ErrorCode::Window, "weight window needs at least two rows");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(t2s.size());
  for (std::size_t i = rows.first + 1; i < rows.second; ++i) {
    const Eigen::VectorXd prev = decimal_row(panel, i - 1);
    const Eigen::VectorXd cur = decimal_row(panel, i);
    auto R = [&](int t) {
      return simple_return(interpolate_yield(panel.grid(), prev, t),
                           interpolate_yield(panel.grid(), cur, t - 1.0), t);
    };
    const double r1 = R(t1);
    for (std::size_t j = 0; j < t2s.size(); ++j) w(j) += std::abs(R(t2s[j]) - r1);
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::Data, "historical excess returns are all zero");
  return w / total;
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

LedgerEntry trade(const ReturnTable& table, std::size_t s, int t1, int t2, double notional,
                  const TradingOptions& opt) {
  const auto a = table.column(t1), b = table.column(t2);
  const auto row = static_cast<Eigen::Index>(s);
  LedgerEntry e;
  e.label = table.labels[s];
  e.period = s;
  e.t1 = t1;
  e.t2 = t2;
  e.predicted_spread = table.predicted(row, b) - table.predicted(row, a);
  if (opt.invert_signals) e.predicted_spread = -e.predicted_spread;
  const auto& realized = opt.returns == ReturnForm::Log ? table.realized_log : table.realized_simple;
  e.realized_spread = realized(row, b) - realized(row, a);
  e.stake = notional * sign(e.predicted_spread);
  e.profit = e.stake * e.realized_spread;
  return e;
}

void record(TradingLedger& ledger, const LedgerEntry& e, const ReturnTable& table) {
  // Direction is judged on the log-return spread regardless of accounting.
  const auto row = static_cast<Eigen::Index>(e.period);
  const double actual = table.realized_log(row, table.column(e.t2)) -
                        table.realized_log(row, table.column(e.t1));
  auto& d = ledger.directional;
  if (actual > 0.0) {
    ++d.positive_total;
    if (e.predicted_spread > 0.0) ++d.positive_hits;
  } else if (actual < 0.0) {
    ++d.negative_total;
    if (e.predicted_spread < 0.0) ++d.negative_hits;
  }
  ledger.entries.push_back(e);
}

void close_books(TradingLedger& ledger, std::size_t periods) {
  std::vector<long double> acc(periods, 0.0L);
  for (const auto& e : ledger.entries) acc[e.period] += e.profit;
  long double total = 0.0L;
  ledger.period_profits.resize(periods);
  for (std::size_t s = 0; s < periods; ++s) {
    ledger.period_profits[s] = static_cast<double>(acc[s]);
    total += acc[s];
  }
  ledger.cumulative = static_cast<double>(total);
}

}  // namespace

TradingLedger algo1_weighted_pairs(const ReturnTable& table, int t1, const std::vector<int>& t2s,
                                   const Eigen::VectorXd& weights, const TradingOptions& options) {
  if (weights.size() != static_cast<Eigen::Index>(t2s.size()))
    throw Error(ErrorCode::Dimension, "one weight per sub-portfolio required");
  TradingLedger ledger;
  ledger.model = table.model;
  const auto P = static_cast<std::size_t>(table.periods());
  for (std::size_t s = 0; s < P; ++s)
    for (std::size_t j = 0; j < t2s.size(); ++j)
      record(ledger, trade(table, s, t1, t2s[j], options.stake * weights(j), options), table);
  close_books(ledger, P);
  return ledger;
}

TradingLedger algo2_optimal_pairs(const ReturnTable& table, int t1,
                                  const std::vector<int>& universe,
                                  const TradingOptions& options) {
  std::vector<int> candidates;
  for (int t : universe)
    if (t != t1) candidates.push_back(t);
  if (candidates.empty()) throw Error(ErrorCode::Maturity, "no second maturity to pair with");
  std::sort(candidates.begin(), candidates.end());
  TradingLedger ledger;
  ledger.model = table.model;
  const auto P = static_cast<std::size_t>(table.periods());
  const auto a = table.column(t1);
  for (std::size_t s = 0; s < P; ++s) {
    const auto row = static_cast<Eigen::Index>(s);
    int best = candidates.front();
    double best_abs = -1.0;
    for (int t : candidates) {
      const double v = std::abs(table.predicted(row, table.column(t)) - table.predicted(row, a));
      if (v > best_abs) {
        best_abs = v;
        best = t;
      }
    }
    record(ledger, trade(table, s, t1, best, options.stake, options), table);
  }
  close_books(ledger, P);
  return ledger;
}

TradingLedger fixed_pair(const ReturnTable& table, int t1, int t2, const TradingOptions& options) {
  TradingLedger ledger;
  ledger.model = table.model;
  const auto P = static_cast<std::size_t>(table.periods());
  for (std::size_t s = 0; s < P; ++s)
    record(ledger, trade(table, s, t1, t2, options.stake, options), table);
  close_books(ledger, P);
  return ledger;
}

PairGrid algo3_fixed_pairs(const ReturnTable& table, const std::vector<int>& universe,
                           const TradingOptions& options) {
  PairGrid grid;
  grid.model = table.model;
  grid.maturities = universe;
  std::sort(grid.maturities.begin(), grid.maturities.end());
  const auto U = static_cast<Eigen::Index>(grid.maturities.size());
  grid.cumulative = Eigen::MatrixXd::Constant(U, U, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index a = 0; a < U; ++a)
    for (Eigen::Index b = a + 1; b < U; ++b)
      grid.cumulative(a, b) =
          fixed_pair(table, grid.maturities[a], grid.maturities[b], options).cumulative;
  return grid;
}

Eigen::MatrixXi winner_grid(const std::vector<PairGrid>& grids) {
  if (grids.empty()) return {};
  const auto U = grids.front().cumulative.rows();
  Eigen::MatrixXi out = Eigen::MatrixXi::Constant(U, U, -1);
  for (Eigen::Index a = 0; a < U; ++a)
    for (Eigen::Index b = a + 1; b < U; ++b) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t g = 0; g < grids.size(); ++g) {
        if (grids[g].maturities != grids.front().maturities)
          throw Error(ErrorCode::Dimension, "pair grids cover different maturities");
        if (grids[g].cumulative(a, b) > best) {
          best = grids[g].cumulative(a, b);
          out(a, b) = static_cast<int>(g);
        }
      }
    }
  return out;
}

TradingLedger algo1_weighted_pairs(const CurvePanel& panel, const ModelFactory& factory,
                                   std::size_t window, const TradingOptions& options) {
  auto universe = algo1_maturities();
  const int t1 = universe.front();
  const std::vector<int> t2s(universe.begin() + 1, universe.end());
  const auto weights = algo1_weights(panel, t1, t2s, weight_rows(panel, window));
  return algo1_weighted_pairs(build_return_table(panel, factory, universe, window), t1, t2s,
                              weights, options);
}

TradingLedger algo2_optimal_pairs(const CurvePanel& panel, const ModelFactory& factory, int t1,
                                  std::size_t window, const TradingOptions& options) {
  const auto universe = algo2_maturities();
  if (std::find(universe.begin(), universe.end(), t1) == universe.end())
    throw Error(ErrorCode::Maturity, "t1 must be one of the optimal-pairs maturities");
  return algo2_optimal_pairs(build_return_table(panel, factory, universe, window), t1, universe,
                             options);
}

PairGrid algo3_fixed_pairs(const CurvePanel& panel, const ModelFactory& factory,
                           std::size_t window, const TradingOptions& options) {
  const auto universe = algo3_maturities();
  return algo3_fixed_pairs(build_return_table(panel, factory, universe, window), universe, options);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::Dimension, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

TradingSummary summarize(const TradingLedger& ledger) {
  TradingSummary out;
  out.cumulative = ledger.cumulative;
  out.median = quantile(ledger.period_profits, 0.5);
  out.p10 = quantile(ledger.period_profits, 0.1);
  out.p90 = quantile(ledger.period_profits, 0.9);
  out.directional = ledger.directional;
  return out;
}

}  // namespace fdfm
