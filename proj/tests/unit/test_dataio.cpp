#include <fdfm/config.hpp>
#include <fdfm/dataio.hpp>
#include <fdfm/serialize.hpp>
#include <fdfm/simulate.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

using namespace fdfm;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no fdfm::Error thrown";
  return ErrorCode::Usage;
}

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

CurvePanel parse(const std::string& text) {
  std::istringstream in(text);
  return read_panel(in, "t.csv");
}

}  // namespace

TEST(PanelCsv, ReadsEighteenMaturityHeader) {
  std::string text = "date,1.5,3,6,9,12,15,18,21,24,30,36,48,60,72,84,96,108,120\n";
  for (int i = 0; i < 192; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", 1985 + i / 12, i % 12 + 1);
    text += buf;
    for (int j = 0; j < 18; ++j) text += "," + std::to_string(5 + 0.01 * j);
    text += "\n";
  }
  auto p = parse(text);
  EXPECT_EQ(p.maturities(), 18);
  EXPECT_EQ(p.periods(), 192);
  EXPECT_EQ(p.dates().front(), "1985-01");
  EXPECT_EQ(p.dates().back(), "2000-12");
  EXPECT_EQ(p.grid().front(), 1.5);
}

TEST(PanelCsv, SchemaErrorsCarryPosition) {
  EXPECT_EQ(code_of([] { parse("date,3,3,6\n2000-01,1,2,3\n"); }), ErrorCode::Schema);
  EXPECT_NE(error_text([] { parse("date,3,3,6\n2000-01,1,2,3\n"); }).find("row 1, column 3"),
            std::string::npos);
  EXPECT_NE(error_text([] { parse("date,3,6,9\n2000-01,1,,3\n"); }).find("row 2, column 3"),
            std::string::npos);
  EXPECT_NE(error_text([] { parse("date,3,6,9\n2000-01,1,x,3\n"); }).find("row 2, column 3"),
            std::string::npos);
  EXPECT_EQ(code_of([] { parse("date,3,6,9\n2000-13,1,2,3\n"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse("date,3,6,9\n2000-02,1,2,3\n2000-01,1,2,3\n"); }),
            ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse("when,3,6,9\n2000-01,1,2,3\n"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse("date,3,6\n2000-01,1,2\n"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse("date,3,6,9\n2000-01,1,2\n"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { load_panel("/nonexistent/panel.csv"); }), ErrorCode::Io);
}

TEST(PanelCsv, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 9);
  Eigen::MatrixXd x(25, 5);
  for (auto& v : x.reshaped()) v = u(rng);
  CurvePanel p(x, KnotGrid({1.5, 3, 6.25, 12, 120}));
  auto back = parse(panel_to_csv(p));
  EXPECT_EQ(back.data(), x);
  EXPECT_EQ(back.grid(), p.grid());
  EXPECT_EQ(panel_to_csv(back), panel_to_csv(p));
  // decimal panels are written in percent
  auto dec = p.in_units(YieldUnits::MonthlyDecimal);
  auto again = parse(panel_to_csv(dec));
  EXPECT_LT((again.data() - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Numbers, FormatParse) {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 123456789.123456789, 6.02214076e23})
    EXPECT_EQ(parse_double(format_double(v), "x"), v);
  EXPECT_THROW(parse_double("1.5x", "x"), Error);
  EXPECT_THROW(parse_double("", "x"), Error);
  EXPECT_EQ(convert_yield(6.0, YieldUnits::AnnualPercent, YieldUnits::MonthlyDecimal), 0.005);
}

TEST(AtomicWrite, ReplacesAndCreatesDirectories) {
  auto dir = std::filesystem::temp_directory_path() / "fdfm_atomic_test";
  std::filesystem::remove_all(dir);
  auto file = dir / "sub" / "out.txt";
  write_file_atomic(file, "one\n");
  write_file_atomic(file, "two\n");
  EXPECT_EQ(read_file(file), "two\n");
  EXPECT_FALSE(std::filesystem::exists(file.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
  std::istringstream in(R"(# comment
[run]
model = dns
seed = 11
[fdfm]
factors = 2
lambda_grid = 0.1, 1, 10
gcv = false
fixed_lambdas = 5, 6
[rolling]
window = 60
horizons = 1, 3
[trading]
algo = 2
t1 = 7
returns = simple
[simulate]
phi = 0.9, 0.4
)");
  auto c = parse_config(in);
  EXPECT_EQ(c.model, "dns");
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.fdfm.factors, 2);
  EXPECT_EQ(c.fdfm.lambda_grid, (std::vector<double>{0.1, 1, 10}));
  EXPECT_FALSE(c.fdfm.gcv_enabled);
  EXPECT_EQ(*c.fdfm.fixed_lambdas, (std::vector<double>{5, 6}));
  EXPECT_EQ(c.rolling.window, 60u);
  EXPECT_EQ(c.rolling.horizons, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.trading.algo, 2);
  EXPECT_EQ(c.trading.options.returns, ReturnForm::Simple);
  EXPECT_EQ(c.simulation.phi, (std::vector<double>{0.9, 0.4}));

  auto bad = [](const std::string& text) {
    return code_of([&] {
      std::istringstream s(text);
      parse_config(s);
    });
  };
  EXPECT_EQ(bad("[run]\ncolour = red\n"), ErrorCode::Config);
  EXPECT_EQ(bad("[nope]\n"), ErrorCode::Config);
  EXPECT_EQ(bad("factors = 2\n"), ErrorCode::Config);
  EXPECT_EQ(bad("[fdfm]\nfactors = two\n"), ErrorCode::Config);
  EXPECT_EQ(bad("[trading]\nalgo = 4\n"), ErrorCode::Config);
  EXPECT_FALSE(config_keys().empty());
}

TEST(Serialize, FdfmModelRoundTripIsBitExact) {
  SimulationSpec spec;
  spec.periods = 80;
  spec.maturities = 8;
  auto sim = simulate_panel(spec);
  FdfmConfig cfg;
  cfg.factors = 2;
  cfg.lambda_grid = {0.1, 10, 1000};
  auto model = fit(sim.panel, cfg);
  const std::string text = model_to_string(model);
  EXPECT_EQ(model_kind(text), "fdfm");
  std::istringstream in(text);
  auto back = read_model(in);
  EXPECT_EQ(model_to_string(back), text);
  EXPECT_EQ(back.scores, model.scores);
  EXPECT_EQ(back.sigma2, model.sigma2);
  EXPECT_EQ(back.lambdas, model.lambdas);
  EXPECT_EQ(back.loadings[1].second_derivatives(), model.loadings[1].second_derivatives());
  EXPECT_EQ(back.factors[0].coefficients, model.factors[0].coefficients);
  EXPECT_EQ(back.diagnostics.iterations, model.diagnostics.iterations);
  EXPECT_EQ(forecast_curve(back, 3, {2.0, 50.0}).values,
            forecast_curve(model, 3, {2.0, 50.0}).values);
}

TEST(Serialize, DnsModelRoundTripAndBadInput) {
  SimulationSpec spec;
  spec.periods = 50;
  spec.maturities = 8;
  spec.factors = 3;
  spec.phi = {0.9, 0.7, 0.5};
  spec.innovation_sd = {1, 1, 1};
  auto sim = simulate_panel(spec);
  auto dns = dns_fit(sim.panel);
  std::ostringstream out;
  write_dns_model(out, dns);
  EXPECT_EQ(model_kind(out.str()), "dns");
  std::istringstream in(out.str());
  auto back = read_dns_model(in);
  EXPECT_EQ(back.factor_series, dns.factor_series);
  EXPECT_EQ(back.alpha, dns.alpha);
  EXPECT_EQ(dns_forecast(back, 2, {7.0})(0), dns_forecast(dns, 2, {7.0})(0));

  std::istringstream junk("format something-else\nversion 1\n");
  EXPECT_THROW(read_model(junk), Error);
}
