#include "cli.hpp"

#include "fdfm/fdfm.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace fdfm::cli {

namespace {

namespace fs = std::filesystem;

// Flags shared by every subcommand plus the union of per-command flags; a
// subcommand only registers the ones it understands.
struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string data;
  std::string model_file;
  std::string models;
  std::string maturities;
  std::string withhold;
  std::string study = "rolling";
  std::string deleted;
  std::string lambdas;
  int factors = 0;
  int ar_order = 0;
  int horizon = 1;
  int algo = 0;
  int t1 = 0;
  long long periods = 0;
  long long columns = 0;
  double noise = 0.0;
  bool no_gcv = false;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(parse_double(item, what));
    } catch (const Error&) {
      throw Error(ErrorCode::Usage, what + ": not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::Usage, what + " is empty");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
  return out;
}

// Collects every output first so a failure leaves nothing half-written.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  void commit(std::ostream& out) const {
    for (const auto& [name, content] : files_) {
      write_file_atomic(dir_ / name, content);
      out << (dir_ / name).string() << '\n';
    }
  }

 private:
  fs::path dir_;
  std::map<std::string, std::string> files_;
};

CurvePanel require_panel(const Flags& f) {
  if (f.data.empty()) throw Error(ErrorCode::Usage, "--data is required");
  return load_panel(f.data);
}

ModelFactory factory_for(const std::string& name, const RunConfig& cfg, const CurvePanel* panel) {
  if (name == "fdfm") return fdfm_factory(cfg.fdfm);
  if (name == "dns") return dns_factory(cfg.dns_alpha);
  if (name == "rw") return rw_factory();
  if (name == "perfect" && panel) return perfect_foresight_factory(*panel);
  throw Error(ErrorCode::Usage, "unknown model '" + name + "'");
}

std::vector<std::string> model_names(const Flags& f, const RunConfig& cfg) {
  return f.models.empty() ? std::vector<std::string>{cfg.model} : split_names(f.models);
}

std::string date_label(const CurvePanel& p, Eigen::Index i) {
  return p.has_dates() ? p.dates()[i] : std::to_string(i + 1);
}

std::vector<double> plot_points(const KnotGrid& grid, int count = 200) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = grid.front() + (grid.back() - grid.front()) * i / (count - 1.0);
  return out;
}

std::string fdfm_loadings_csv(const FdfmModel& model) {
  std::ostringstream out;
  out << "maturity_months";
  for (int k = 0; k < model.factor_count(); ++k) out << ",loading_" << k + 1;
  out << '\n';
  for (double t : plot_points(model.grid)) {
    out << format_double(t);
    for (int k = 0; k < model.factor_count(); ++k)
      out << ',' << format_double(evaluate(model.loadings[k], t));
    out << '\n';
  }
  return out.str();
}

std::string dns_loadings_csv(const DnsModel& model) {
  std::ostringstream out;
  out << "maturity_months,level,slope,curvature\n";
  for (double t : plot_points(model.grid)) {
    const auto l = dns_loadings(t, model.alpha);
    out << format_double(t) << ',' << format_double(l.level) << ',' << format_double(l.slope)
        << ',' << format_double(l.curvature) << '\n';
  }
  return out.str();
}

std::string scores_csv(const CurvePanel& panel, const Eigen::MatrixXd& scores) {
  std::ostringstream out;
  out << "date";
  for (Eigen::Index k = 0; k < scores.cols(); ++k) out << ",factor_" << k + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out << date_label(panel, i);
    for (Eigen::Index k = 0; k < scores.cols(); ++k) out << ',' << format_double(scores(i, k));
    out << '\n';
  }
  return out.str();
}

std::string fit_summary(const FdfmModel& model) {
  std::ostringstream out;
  const auto& d = model.diagnostics;
  out << "factors " << model.factor_count() << '\n'
      << "sigma2 " << format_double(model.sigma2) << '\n'
      << "lambdas " << join(model.lambdas) << '\n'
      << "converged " << (d.converged ? "true" : "false") << '\n'
      << "iterations " << d.iterations << '\n'
      << "final_change " << format_double(d.final_change) << '\n'
      << "damped_steps " << d.damped_steps << '\n'
      << "stalled " << (d.stalled ? "true" : "false") << '\n';
  for (int k = 0; k < model.factor_count(); ++k) {
    const auto& p = model.factors[k];
    out << "factor_" << k + 1 << ".phi";
    for (Eigen::Index r = 0; r < p.coefficients.size(); ++r)
      out << ' ' << format_double(p.coefficients(r));
    out << '\n'
        << "factor_" << k + 1 << ".intercept " << format_double(p.intercept) << '\n'
        << "factor_" << k + 1 << ".innovation_variance " << format_double(p.innovation_variance)
        << '\n';
  }
  for (const auto& w : d.warnings) out << "warning " << w << '\n';
  return out.str();
}

void apply_fdfm_flags(const Flags& f, RunConfig& cfg) {
  if (f.factors > 0) cfg.fdfm.factors = f.factors;
  if (f.ar_order > 0) cfg.fdfm.ar_order = f.ar_order;
  if (f.no_gcv) cfg.fdfm.gcv_enabled = false;
  if (!f.lambdas.empty()) {
    cfg.fdfm.fixed_lambdas = parse_list(f.lambdas, "--lambda");
    cfg.fdfm.gcv_enabled = false;
  }
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Flags& f, RunConfig cfg, Outputs& outputs) {
  auto& spec = cfg.simulation;
  spec.seed = cfg.seed;
  if (f.factors > 0) {
    spec.factors = f.factors;
    // Keep one AR coefficient per factor when only K is given.
    while (static_cast<int>(spec.phi.size()) < spec.factors) spec.phi.push_back(0.5);
    while (static_cast<int>(spec.innovation_sd.size()) < spec.factors) spec.innovation_sd.push_back(1.0);
    spec.phi.resize(spec.factors);
    spec.innovation_sd.resize(spec.factors);
  }
  if (f.periods > 0) spec.periods = f.periods;
  if (f.columns > 0) spec.maturities = f.columns;
  if (f.noise > 0.0) spec.noise_sd = f.noise;
  const auto sim = simulate_panel(spec);
  outputs.add("panel.csv", panel_to_csv(sim.panel));
  std::ostringstream l;
  l << "maturity_months";
  for (int k = 0; k < spec.factors; ++k) l << ",loading_" << k + 1;
  l << '\n';
  for (std::size_t j = 0; j < sim.panel.grid().size(); ++j) {
    l << format_double(sim.panel.grid().knot(j));
    for (int k = 0; k < spec.factors; ++k) l << ',' << format_double(sim.loadings(k, j));
    l << '\n';
  }
  outputs.add("true_loadings.csv", l.str());
  const CurvePanel dated = CurvePanel(sim.panel.data(), sim.panel.grid());
  outputs.add("true_factors.csv", scores_csv(dated, sim.factors));
  std::ostringstream t;
  t << "seed " << spec.seed << '\n'
    << "noise_sd " << format_double(spec.noise_sd) << '\n'
    << "phi " << join(spec.phi) << '\n'
    << "innovation_sd " << join(spec.innovation_sd) << '\n';
  outputs.add("truth.txt", t.str());
  return 0;
}

int cmd_fit(const Flags& f, RunConfig cfg, Outputs& outputs) {
  apply_fdfm_flags(f, cfg);
  const auto panel = require_panel(f);
  const auto names = model_names(f, cfg);
  if (names.size() != 1) throw Error(ErrorCode::Usage, "fit takes a single model");
  if (names[0] == "fdfm") {
    const auto model = fit(panel, cfg.fdfm);
    outputs.add("model.txt", model_to_string(model));
    outputs.add("loadings.csv", fdfm_loadings_csv(model));
    outputs.add("scores.csv", scores_csv(panel, model.scores));
    std::ostringstream tr;
    tr << "iteration,penalized_loglik\n";
    for (std::size_t i = 0; i < model.fit_trace.size(); ++i)
      tr << i << ',' << format_double(model.fit_trace[i]) << '\n';
    outputs.add("fit_trace.csv", tr.str());
    outputs.add("summary.txt", fit_summary(model));
  } else if (names[0] == "dns") {
    const auto model = dns_fit(panel, cfg.dns_alpha);
    std::ostringstream m;
    write_dns_model(m, model);
    outputs.add("model.txt", m.str());
    outputs.add("loadings.csv", dns_loadings_csv(model));
    outputs.add("scores.csv", scores_csv(panel, model.factor_series));
  } else {
    throw Error(ErrorCode::Usage, "fit supports fdfm and dns");
  }
  return 0;
}

std::unique_ptr<CurveModel> fitted_model(const Flags& f, const RunConfig& cfg,
                                         std::optional<CurvePanel>& panel) {
  if (!f.model_file.empty()) {
    const auto doc = read_file(f.model_file);
    std::istringstream in(doc);
    if (model_kind(doc) == "fdfm") {
      struct Loaded : CurveModel {
        FdfmModel m;
        explicit Loaded(FdfmModel model) : m(std::move(model)) {}
        std::string name() const override { return "fdfm"; }
        void fit(const CurvePanel&) override {}
        Eigen::VectorXd forecast(int h, const std::vector<double>& t) const override {
          return forecast_curve(m, h, t).values;
        }
        Eigen::MatrixXd synthesize(const std::vector<double>& t) const override {
          Eigen::MatrixXd out(m.periods(), t.size());
          for (std::size_t j = 0; j < t.size(); ++j) out.col(j) = synthesize_series(m, t[j]).values;
          return out;
        }
      };
      auto model = read_model(in);
      if (!panel) panel.emplace(model.fitted_values(), model.grid);
      return std::make_unique<Loaded>(std::move(model));
    }
    struct LoadedDns : CurveModel {
      DnsModel m;
      explicit LoadedDns(DnsModel model) : m(std::move(model)) {}
      std::string name() const override { return "dns"; }
      void fit(const CurvePanel&) override {}
      Eigen::VectorXd forecast(int h, const std::vector<double>& t) const override {
        return dns_forecast(m, h, t);
      }
      Eigen::MatrixXd synthesize(const std::vector<double>& t) const override {
        return dns_synthesize(m, t);
      }
    };
    auto model = read_dns_model(in);
    if (!panel) panel.emplace(dns_synthesize(model, model.grid.knots()), model.grid);
    return std::make_unique<LoadedDns>(std::move(model));
  }
  if (!panel) panel.emplace(require_panel(f));
  const auto names = model_names(f, cfg);
  if (names.size() != 1) throw Error(ErrorCode::Usage, "expected a single model");
  auto model = factory_for(names[0], cfg, nullptr)();
  model->fit(*panel);
  return model;
}

int cmd_forecast(const Flags& f, RunConfig cfg, Outputs& outputs) {
  apply_fdfm_flags(f, cfg);
  if (f.horizon < 1) throw Error(ErrorCode::Usage, "--h must be at least 1");
  std::optional<CurvePanel> panel;
  if (!f.data.empty()) panel.emplace(require_panel(f));
  const auto model = fitted_model(f, cfg, panel);
  const auto mats = f.maturities.empty() ? panel->grid().knots()
                                         : parse_list(f.maturities, "--maturities");
  std::ostringstream out;
  out << "model,horizon,maturity_months,forecast_percent,extrapolated\n";
  for (int h = 1; h <= f.horizon; ++h) {
    const Eigen::VectorXd v = model->forecast(h, mats);
    for (std::size_t j = 0; j < mats.size(); ++j)
      out << model->name() << ',' << h << ',' << format_double(mats[j]) << ','
          << format_double(v(j)) << ',' << (panel->grid().contains(mats[j]) ? 0 : 1) << '\n';
  }
  outputs.add("forecast.csv", out.str());
  return 0;
}

int cmd_synthesize(const Flags& f, RunConfig cfg, Outputs& outputs) {
  apply_fdfm_flags(f, cfg);
  std::ostringstream out;
  if (!f.withhold.empty()) {
    const auto panel = require_panel(f);
    const auto drop = parse_list(f.withhold, "--withhold");
    std::vector<std::size_t> keep, withheld;
    for (std::size_t j = 0; j < panel.grid().size(); ++j) {
      const bool gone = std::find(drop.begin(), drop.end(), panel.grid().knot(j)) != drop.end();
      (gone ? withheld : keep).push_back(j);
    }
    if (withheld.size() != drop.size())
      throw Error(ErrorCode::Maturity, "--withhold maturities must be observed columns");
    const auto names = model_names(f, cfg);
    if (names.size() != 1) throw Error(ErrorCode::Usage, "synthesize takes a single model");
    auto model = factory_for(names[0], cfg, nullptr)();
    const auto reduced = panel.select_columns(keep);
    model->fit(reduced);
    std::vector<double> mats;
    for (auto j : withheld) mats.push_back(panel.grid().knot(j));
    const Eigen::MatrixXd syn = model->synthesize(mats);
    out << "date,maturity_months,actual_percent,synthesized_percent,extrapolated\n";
    for (std::size_t c = 0; c < mats.size(); ++c)
      for (Eigen::Index i = 0; i < panel.periods(); ++i)
        out << date_label(panel, i) << ',' << format_double(mats[c]) << ','
            << format_double(panel.data()(i, withheld[c])) << ',' << format_double(syn(i, c)) << ','
            << (reduced.grid().contains(mats[c]) ? 0 : 1) << '\n';
  } else {
    if (f.maturities.empty()) throw Error(ErrorCode::Usage, "--maturities or --withhold is required");
    std::optional<CurvePanel> panel;
    if (!f.data.empty()) panel.emplace(require_panel(f));
    const auto model = fitted_model(f, cfg, panel);
    const auto mats = parse_list(f.maturities, "--maturities");
    const Eigen::MatrixXd syn = model->synthesize(mats);
    out << "date,maturity_months,synthesized_percent,extrapolated\n";
    for (std::size_t c = 0; c < mats.size(); ++c)
      for (Eigen::Index i = 0; i < syn.rows(); ++i)
        out << date_label(*panel, i) << ',' << format_double(mats[c]) << ','
            << format_double(syn(i, c)) << ',' << (panel->grid().contains(mats[c]) ? 0 : 1) << '\n';
  }
  outputs.add("synthesized.csv", out.str());
  return 0;
}

std::string metric_cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

int cmd_evaluate(const Flags& f, RunConfig cfg, Outputs& outputs) {
  apply_fdfm_flags(f, cfg);
  const auto panel = require_panel(f);
  const bool rolling = f.study == "rolling" || f.study == "all";
  const bool synthesis = f.study == "synthesis" || f.study == "all";
  if (!rolling && !synthesis) throw Error(ErrorCode::Usage, "--study must be rolling, synthesis or all");
  if (rolling) {
    std::ostringstream out;
    out << "model,horizon,maturity_months,count,mfe_percent,rmsfe_percent,mape_percent\n";
    for (const auto& name : model_names(f, cfg)) {
      const auto table = rolling_forecast_eval(panel, factory_for(name, cfg, &panel), cfg.rolling);
      for (const auto& r : table.rows)
        out << r.model << ',' << r.horizon << ',' << format_double(r.maturity) << ',' << r.count
            << ',' << format_double(r.metrics.mfe) << ',' << format_double(r.metrics.rmsfe) << ','
            << metric_cell(r.metrics.mape) << '\n';
    }
    outputs.add("metrics.csv", out.str());
  }
  if (synthesis) {
    std::vector<int> ls;
    if (f.deleted.empty()) {
      ls.push_back(cfg.synthesis.deleted);
    } else {
      for (double v : parse_list(f.deleted, "--deleted")) ls.push_back(static_cast<int>(v));
    }
    std::ostringstream out;
    out << "deleted,variant,short_ratio,mid_ratio,long_ratio,all_ratio\n";
    std::ostringstream detail;
    detail << "deleted,model,maturity_months,rmsfe_percent_all,rmsfe_percent_interior\n";
    for (int L : ls) {
      auto spec = cfg.synthesis;
      spec.deleted = L;
      spec.min_retained = std::max(spec.min_retained, cfg.fdfm.factors + 1);
      const auto a = synthesis_study(panel, fdfm_factory(cfg.fdfm), spec);
      const auto b = synthesis_study(panel, dns_factory(cfg.dns_alpha), spec);
      const auto t = synthesis_ratios(a, b);
      auto row = [&](const char* variant, const BucketValues& v) {
        out << L << ',' << variant << ',' << format_double(v.short_end) << ','
            << format_double(v.mid) << ',' << format_double(v.long_end) << ','
            << format_double(v.all) << '\n';
      };
      row("with_extrapolation", t.with_extrapolation);
      row("without_extrapolation", t.without_extrapolation);
      for (const auto* res : {&a, &b})
        for (std::size_t j = 0; j < res->maturities.size(); ++j)
          detail << L << ',' << res->model << ',' << format_double(res->maturities[j]) << ','
                 << format_double(res->rmsfe_all(j)) << ','
                 << format_double(res->rmsfe_interior(j)) << '\n';
    }
    outputs.add("synthesis_ratios.csv", out.str());
    outputs.add("synthesis_rmsfe.csv", detail.str());
  }
  return 0;
}

std::string ledger_csv(const TradingLedger& ledger) {
  std::ostringstream out;
  out << "date,period,t1_months,t2_months,stake_usd,predicted_spread_decimal,"
         "realized_spread_decimal,profit_usd\n";
  for (const auto& e : ledger.entries)
    out << e.label << ',' << e.period << ',' << e.t1 << ',' << e.t2 << ','
        << format_double(e.stake) << ',' << format_double(e.predicted_spread) << ','
        << format_double(e.realized_spread) << ',' << format_double(e.profit) << '\n';
  return out.str();
}

std::string summary_block(const std::string& label, const TradingLedger& ledger) {
  const auto s = summarize(ledger);
  const auto& d = s.directional;
  std::ostringstream out;
  out << "[" << label << "]\n"
      << "cumulative_usd = " << format_double(s.cumulative) << '\n'
      << "median_period_profit_usd = " << format_double(s.median) << '\n'
      << "p10_period_profit_usd = " << format_double(s.p10) << '\n'
      << "p90_period_profit_usd = " << format_double(s.p90) << '\n'
      << "positive_spreads = " << d.positive_hits << "/" << d.positive_total << '\n'
      << "negative_spreads = " << d.negative_hits << "/" << d.negative_total << '\n';
  return out.str();
}

std::string grid_csv(const PairGrid& grid) {
  std::ostringstream out;
  out << "t1_months,t2_months,cumulative_usd\n";
  const auto U = grid.maturities.size();
  for (std::size_t a = 0; a < U; ++a)
    for (std::size_t b = a + 1; b < U; ++b)
      out << grid.maturities[a] << ',' << grid.maturities[b] << ','
          << format_double(grid.cumulative(a, b)) << '\n';
  return out.str();
}

int cmd_backtest(const Flags& f, RunConfig cfg, Outputs& outputs) {
  apply_fdfm_flags(f, cfg);
  if (f.algo > 0) cfg.trading.algo = f.algo;
  if (f.t1 > 0) cfg.trading.t1 = f.t1;
  cfg.validate();
  const auto panel = require_panel(f);
  const auto window = cfg.rolling.window;
  const auto names = model_names(f, cfg);
  std::string summary;
  std::vector<PairGrid> grids;
  for (const auto& name : names) {
    const auto factory = factory_for(name, cfg, &panel);
    const auto& opt = cfg.trading.options;
    if (cfg.trading.algo == 1) {
      auto universe = algo1_maturities();
      const int t1 = universe.front();
      const std::vector<int> t2s(universe.begin() + 1, universe.end());
      const auto rows = weight_rows(panel, window, cfg.trading.weight_begin, cfg.trading.weight_end);
      const auto weights = algo1_weights(panel, t1, t2s, rows);
      const auto ledger = algo1_weighted_pairs(build_return_table(panel, factory, universe, window),
                                               t1, t2s, weights, opt);
      outputs.add("ledger_" + name + ".csv", ledger_csv(ledger));
      summary += summary_block(name, ledger);
    } else if (cfg.trading.algo == 2) {
      const auto universe = algo2_maturities();
      if (std::find(universe.begin(), universe.end(), cfg.trading.t1) == universe.end())
        throw Error(ErrorCode::Maturity, "t1 must be one of the optimal-pairs maturities");
      const auto ledger = algo2_optimal_pairs(build_return_table(panel, factory, universe, window),
                                              cfg.trading.t1, universe, opt);
      outputs.add("ledger_" + name + ".csv", ledger_csv(ledger));
      summary += summary_block(name, ledger);
    } else {
      const auto universe = algo3_maturities();
      auto grid = algo3_fixed_pairs(build_return_table(panel, factory, universe, window), universe, opt);
      outputs.add("pair_grid_" + name + ".csv", grid_csv(grid));
      grids.push_back(std::move(grid));
    }
  }
  if (cfg.trading.algo == 3 && !grids.empty()) {
    const auto win = winner_grid(grids);
    std::ostringstream out;
    out << "t1_months,t2_months,winner\n";
    const auto& m = grids.front().maturities;
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = a + 1; b < m.size(); ++b)
        out << m[a] << ',' << m[b] << ',' << names[win(a, b)] << '\n';
    outputs.add("winner_grid.csv", out.str());
  } else {
    outputs.add("summary.txt", summary);
  }
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Functional dynamic factor model for yield curves", "fdfm"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help");
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "Configuration file");
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--out-dir", f.out_dir, "Output directory");
  };
  auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--data", f.data, "Yield panel CSV (annualized percent)");
    sub->add_option("--model", f.models, "fdfm, dns or rw (comma list where allowed)");
    sub->add_option("--K", f.factors, "Number of factors");
    sub->add_option("--p", f.ar_order, "AR order");
    sub->add_option("--lambda", f.lambdas, "Fixed smoothing parameters (comma list); disables GCV");
    sub->add_flag("--no-gcv", f.no_gcv, "Disable GCV selection");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic factor-model panel");
  common(simulate);
  simulate->add_option("--K", f.factors, "Number of factors");
  simulate->add_option("--n", f.periods, "Number of periods");
  simulate->add_option("--m", f.columns, "Number of maturities");
  simulate->add_option("--noise", f.noise, "Observation noise standard deviation");

  auto* fitc = app.add_subcommand("fit", "Estimate a model and write it out");
  common(fitc);
  model_flags(fitc);

  auto* forecastc = app.add_subcommand("forecast", "Forecast curves for horizons 1..h");
  common(forecastc);
  model_flags(forecastc);
  forecastc->add_option("--model-file", f.model_file, "Previously fitted model");
  forecastc->add_option("--h,--horizon", f.horizon, "Largest horizon");
  forecastc->add_option("--maturities", f.maturities, "Comma list of maturities (months)");

  auto* synth = app.add_subcommand("synthesize", "Series at unobserved or withheld maturities");
  common(synth);
  model_flags(synth);
  synth->add_option("--model-file", f.model_file, "Previously fitted model");
  synth->add_option("--maturities", f.maturities, "Comma list of maturities (months)");
  synth->add_option("--withhold", f.withhold, "Observed maturities to drop before fitting");

  auto* evaluatec = app.add_subcommand("evaluate", "Rolling forecast metrics or synthesis ratios");
  common(evaluatec);
  model_flags(evaluatec);
  evaluatec->add_option("--study", f.study, "rolling, synthesis or all");
  evaluatec->add_option("--deleted", f.deleted, "Deleted column counts for the synthesis study");

  auto* backtestc = app.add_subcommand("backtest", "Pairs-trading backtests");
  common(backtestc);
  model_flags(backtestc);
  backtestc->add_option("--algo", f.algo, "1 weighted pairs, 2 optimal pairs, 3 all fixed pairs");
  backtestc->add_option("--t1", f.t1, "Short maturity for algorithm 2");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& c : msg)
      if (c == '\n') c = ' ';
    err << "error: usage: " << msg << '\n';
    return 2;
  }

  try {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) cfg.seed = f.seed;
    if (sub->count("--out-dir")) cfg.out_dir = f.out_dir;
    if (!f.models.empty() && split_names(f.models).size() == 1 && f.models != "perfect")
      cfg.model = f.models;
    Outputs outputs(cfg.out_dir);
    const std::string name = sub->get_name();
    int rc = 0;
    if (name == "simulate") rc = cmd_simulate(f, cfg, outputs);
    else if (name == "fit") rc = cmd_fit(f, cfg, outputs);
    else if (name == "forecast") rc = cmd_forecast(f, cfg, outputs);
    else if (name == "synthesize") rc = cmd_synthesize(f, cfg, outputs);
    else if (name == "evaluate") rc = cmd_evaluate(f, cfg, outputs);
    else if (name == "backtest") rc = cmd_backtest(f, cfg, outputs);
    outputs.commit(out);
    return rc;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::Usage ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fdfm::cli
