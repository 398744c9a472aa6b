#include "fdfm/evaluation.hpp"

#include "fdfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdfm {

ForecastMetrics metrics(const Eigen::VectorXd& errors, const Eigen::VectorXd& actuals) {
  if (errors.size() != actuals.size() || errors.size() == 0)
    throw Error(ErrorCode::Dimension, "metrics need equal, non-empty error and actual vectors");
  const double r = static_cast<double>(errors.size());
  ForecastMetrics out;
  out.mfe = errors.sum() / r;
  out.rmsfe = std::sqrt(errors.squaredNorm() / r);
  if ((actuals.array() != 0.0).all())
    out.mape = 100.0 * (errors.array().abs() / actuals.array().abs()).sum() / r;
  return out;
}

std::vector<std::size_t> rolling_counts(Eigen::Index periods, const RollingSpec& spec) {
  std::vector<std::size_t> out;
  for (int h : spec.horizons) {
    const auto need = static_cast<Eigen::Index>(spec.window) + h;
    out.push_back(periods >= need ? static_cast<std::size_t>(periods - need + 1) : 0);
  }
  return out;
}

const MetricRow* MetricTable::find(const std::string& model, int horizon, double maturity) const {
  for (const auto& row : rows)
    if (row.model == model && row.horizon == horizon && row.maturity == maturity) return &row;
  return nullptr;
}

MetricTable rolling_forecast_eval(const CurvePanel& panel, const ModelFactory& factory,
                                  const RollingSpec& spec) {
  if (spec.horizons.empty()) throw Error(ErrorCode::Window, "no forecast horizons");
  int max_h = 0;
  for (int h : spec.horizons) {
    if (h < 1) throw Error(ErrorCode::Window, "horizons must be at least 1");
    max_h = std::max(max_h, h);
  }
  const auto n = static_cast<std::size_t>(panel.periods());
  if (spec.window < 1 || n < spec.window + static_cast<std::size_t>(max_h))
    throw Error(ErrorCode::Window, "panel too short for the rolling window and horizons");

  std::vector<std::size_t> cols;
  std::vector<double> mats;
  for (std::size_t j = 0; j < panel.grid().size(); ++j)
    if (panel.grid().knot(j) >= spec.min_maturity) {
      cols.push_back(j);
      mats.push_back(panel.grid().knot(j));
    }
  if (cols.empty()) throw Error(ErrorCode::Maturity, "maturity filter removed every column");

  const auto H = spec.horizons.size();
  std::vector<std::vector<Eigen::VectorXd>> err(H), act(H);
  const auto counts = rolling_counts(panel.periods(), spec);
  for (std::size_t a = 0; a < H; ++a) {
    err[a].assign(cols.size(), Eigen::VectorXd(counts[a]));
    act[a].assign(cols.size(), Eigen::VectorXd(counts[a]));
  }
  std::string name;
  const std::size_t starts = n - spec.window;
  for (std::size_t s = 0; s < starts; ++s) {
    auto model = factory();
    name = model->name();
    model->fit(panel.slice_rows(s, s + spec.window));
    for (std::size_t a = 0; a < H; ++a) {
      const int h = spec.horizons[a];
      const std::size_t target = s + spec.window + static_cast<std::size_t>(h) - 1;
      if (target >= n) continue;
      const Eigen::VectorXd f = model->forecast(h, mats);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double x = panel.data()(static_cast<Eigen::Index>(target),
                                      static_cast<Eigen::Index>(cols[c]));
        act[a][c](s) = x;
        err[a][c](s) = x - f(c);
      }
    }
  }
  MetricTable table;
  for (std::size_t a = 0; a < H; ++a)
    for (std::size_t c = 0; c < cols.size(); ++c)
      table.rows.push_back(MetricRow{name, spec.horizons[a], mats[c], counts[a],
                                     metrics(err[a][c], act[a][c])});
  return table;
}

SynthesisResult synthesis_study(const CurvePanel& panel, const ModelFactory& factory,
                                const SynthesisSpec& spec) {
  const int m = static_cast<int>(panel.maturities());
  const int L = spec.deleted;
  if (L < 1 || L > 8) throw Error(ErrorCode::InfeasibleStudy, "deleted column count must be 1..8");
  if (m - L < std::max(spec.min_retained, 3))
    throw Error(ErrorCode::InfeasibleStudy, "too few retained columns");
  const auto& knots = panel.grid().knots();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SynthesisResult out;
  out.maturities = knots;
  Eigen::VectorXd sum_all = Eigen::VectorXd::Zero(m), sum_in = Eigen::VectorXd::Zero(m);
  out.windows_all.assign(m, 0);
  out.windows_interior.assign(m, 0);
  for (int w = 0; w + L <= m; ++w) {
    std::vector<std::size_t> keep;
    for (int j = 0; j < m; ++j)
      if (j < w || j >= w + L) keep.push_back(static_cast<std::size_t>(j));
    std::vector<double> withheld(knots.begin() + w, knots.begin() + w + L);
    auto model = factory();
    out.model = model->name();
    model->fit(panel.select_columns(keep));
    const Eigen::MatrixXd syn = model->synthesize(withheld);
    const double lo = knots[keep.front()], hi = knots[keep.back()];
    for (int l = 0; l < L; ++l) {
      const int j = w + l;
      const Eigen::VectorXd e = panel.data().col(j) - syn.col(l);
      const double rmsfe = std::sqrt(e.squaredNorm() / static_cast<double>(e.size()));
      sum_all(j) += rmsfe;
      ++out.windows_all[j];
      if (knots[j] >= lo && knots[j] <= hi) {
        sum_in(j) += rmsfe;
        ++out.windows_interior[j];
      }
    }
  }
  out.rmsfe_all.resize(m);
  out.rmsfe_interior.resize(m);
  for (int j = 0; j < m; ++j) {
    out.rmsfe_all(j) = out.windows_all[j] ? sum_all(j) / out.windows_all[j] : nan;
    out.rmsfe_interior(j) = out.windows_interior[j] ? sum_in(j) / out.windows_interior[j] : nan;
  }
  return out;
}

BucketValues bucket_means(const std::vector<double>& maturities, const Eigen::VectorXd& values) {
  double s[4] = {0, 0, 0, 0};
  int c[4] = {0, 0, 0, 0};
  for (std::size_t j = 0; j < maturities.size(); ++j) {
    const double v = values(static_cast<Eigen::Index>(j));
    if (std::isnan(v)) continue;
    const double t = maturities[j];
    int b = -1;
    if (t >= 1.5 && t < 21.0) b = 0;
    else if (t >= 21.0 && t <= 36.0) b = 1;
    else if (t > 36.0 && t <= 120.0) b = 2;
    if (b >= 0) {
      s[b] += v;
      ++c[b];
    }
    s[3] += v;
    ++c[3];
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto mean = [&](int b) { return c[b] ? s[b] / c[b] : nan; };
  return BucketValues{mean(0), mean(1), mean(2), mean(3)};
}

namespace {

BucketValues ratio(const std::vector<double>& mats, Eigen::VectorXd num, Eigen::VectorXd den) {
  // Only maturities available to both models enter either average.
  for (Eigen::Index j = 0; j < num.size(); ++j)
    if (std::isnan(num(j)) || std::isnan(den(j))) num(j) = den(j) = std::nan("");
  const auto a = bucket_means(mats, num);
  const auto b = bucket_means(mats, den);
  return BucketValues{a.short_end / b.short_end, a.mid / b.mid, a.long_end / b.long_end,
                      a.all / b.all};
}

}  // namespace

SynthesisRatioTable synthesis_ratios(const SynthesisResult& numerator,
                                     const SynthesisResult& denominator) {
  if (numerator.maturities != denominator.maturities)
    throw Error(ErrorCode::Dimension, "synthesis results cover different maturities");
  SynthesisRatioTable out;
  out.with_extrapolation =
      ratio(numerator.maturities, numerator.rmsfe_all, denominator.rmsfe_all);
  // The extrapolation rule depends only on the deletion window, so both
  // studies drop the same rows here.
  out.without_extrapolation =
      ratio(numerator.maturities, numerator.rmsfe_interior, denominator.rmsfe_interior);
  return out;
}

SynthesisRatioTable curve_synthesis_eval(const CurvePanel& panel, const ModelFactory& numerator,
                                         const ModelFactory& denominator,
                                         const SynthesisSpec& spec) {
  auto table = synthesis_ratios(synthesis_study(panel, numerator, spec),
                                synthesis_study(panel, denominator, spec));
  table.deleted = spec.deleted;
  return table;
}

}  // namespace fdfm
