#include "fdfm/config.hpp"

#include "fdfm/dataio.hpp"
#include "fdfm/errors.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fdfm {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_number(const std::string& v, const std::string& where) {
  try {
    return parse_double(v, where);
  } catch (const Error&) {
    throw Error(ErrorCode::Config, where + ": expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& v, const std::string& where) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size())
    throw Error(ErrorCode::Config, where + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw Error(ErrorCode::Config, where + ": expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_number(trim(item), where));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.model", [](RunConfig& c, const std::string& v, const std::string& w) {
         if (v != "fdfm" && v != "dns" && v != "rw")
           throw Error(ErrorCode::Config, w + ": model must be fdfm, dns or rw");
         c.model = v;
       }},
      {"run.out_dir", [](RunConfig& c, const std::string& v, const std::string&) { c.out_dir = v; }},
      {"run.seed", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.seed = static_cast<std::uint64_t>(to_integer(v, w));
       }},
      {"fdfm.factors", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fdfm.factors = static_cast<int>(to_integer(v, w));
       }},
      {"fdfm.ar_order", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fdfm.ar_order = static_cast<int>(to_integer(v, w));
       }},
      {"fdfm.lambda_grid", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fdfm.lambda_grid = to_list(v, w);
       }},
      {"fdfm.em_tolerance", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fdfm.em_tolerance = to_number(v, w);
       }},
      {"fdfm.max_iterations", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fdfm.max_iterations = static_cast<int>(to_integer(v, w));
       }},
      {"fdfm.gcv", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fdfm.gcv_enabled = to_bool(v, w);
       }},
      {"fdfm.fixed_lambdas", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fdfm.fixed_lambdas = to_list(v, w);
       }},
      {"fdfm.inner_product", [](RunConfig& c, const std::string& v, const std::string& w) {
         if (v == "discrete") c.fdfm.inner_product = InnerProduct::Discrete;
         else if (v == "quadrature") c.fdfm.inner_product = InnerProduct::Quadrature;
         else throw Error(ErrorCode::Config, w + ": inner_product must be discrete or quadrature");
       }},
      {"dns.alpha", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.dns_alpha = to_number(v, w);
       }},
      {"rolling.window", [](RunConfig& c, const std::string& v, const std::string& w) {
         const auto n = to_integer(v, w);
         if (n < 1) throw Error(ErrorCode::Config, w + ": window must be positive");
         c.rolling.window = static_cast<std::size_t>(n);
       }},
      {"rolling.horizons", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.rolling.horizons.clear();
         for (double h : to_list(v, w)) {
           if (h != std::floor(h)) throw Error(ErrorCode::Config, w + ": horizons are integers");
           c.rolling.horizons.push_back(static_cast<int>(h));
         }
       }},
      {"rolling.min_maturity", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.rolling.min_maturity = to_number(v, w);
       }},
      {"synthesis.deleted", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.synthesis.deleted = static_cast<int>(to_integer(v, w));
       }},
      {"synthesis.min_retained", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.synthesis.min_retained = static_cast<int>(to_integer(v, w));
       }},
      {"trading.algo", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.trading.algo = static_cast<int>(to_integer(v, w));
       }},
      {"trading.t1", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.trading.t1 = static_cast<int>(to_integer(v, w));
       }},
      {"trading.stake", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.trading.options.stake = to_number(v, w);
       }},
      {"trading.returns", [](RunConfig& c, const std::string& v, const std::string& w) {
         if (v == "log") c.trading.options.returns = ReturnForm::Log;
         else if (v == "simple") c.trading.options.returns = ReturnForm::Simple;
         else throw Error(ErrorCode::Config, w + ": returns must be log or simple");
       }},
      {"trading.weight_begin", [](RunConfig& c, const std::string& v, const std::string& w) {
         if (!is_month_label(v)) throw Error(ErrorCode::Config, w + ": expected YYYY-MM");
         c.trading.weight_begin = v;
       }},
      {"trading.weight_end", [](RunConfig& c, const std::string& v, const std::string& w) {
         if (!is_month_label(v)) throw Error(ErrorCode::Config, w + ": expected YYYY-MM");
         c.trading.weight_end = v;
       }},
      {"simulate.factors", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.factors = static_cast<int>(to_integer(v, w));
       }},
      {"simulate.periods", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.periods = to_integer(v, w);
       }},
      {"simulate.maturities", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.maturities = to_integer(v, w);
       }},
      {"simulate.phi", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.phi = to_list(v, w);
       }},
      {"simulate.innovation_sd", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.innovation_sd = to_list(v, w);
       }},
      {"simulate.means", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.means = to_list(v, w);
       }},
      {"simulate.noise_sd", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.noise_sd = to_number(v, w);
       }},
      {"simulate.burn_in", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.burn_in = static_cast<int>(to_integer(v, w));
       }},
      {"simulate.first_maturity", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.first_maturity = to_number(v, w);
       }},
      {"simulate.last_maturity", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.simulation.last_maturity = to_number(v, w);
       }},
  };
  return table;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

void RunConfig::validate() const {
  if (model != "fdfm" && model != "dns" && model != "rw")
    throw Error(ErrorCode::Config, "model must be fdfm, dns or rw");
  if (!(dns_alpha > 0.0)) throw Error(ErrorCode::Config, "dns alpha must be positive");
  if (fdfm.factors < 1 || fdfm.ar_order < 1)
    throw Error(ErrorCode::Config, "factors and ar_order must be at least 1");
  if (fdfm.gcv_enabled && fdfm.lambda_grid.empty())
    throw Error(ErrorCode::Config, "lambda grid is empty with GCV enabled");
  if (rolling.horizons.empty()) throw Error(ErrorCode::Config, "no forecast horizons");
  for (int h : rolling.horizons)
    if (h < 1) throw Error(ErrorCode::Config, "horizons must be at least 1");
  if (trading.algo < 1 || trading.algo > 3) throw Error(ErrorCode::Config, "algo must be 1, 2 or 3");
  if (!(trading.options.stake > 0.0)) throw Error(ErrorCode::Config, "stake must be positive");
  if (trading.weight_end < trading.weight_begin)
    throw Error(ErrorCode::Config, "weight window ends before it begins");
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  const auto& table = setters();
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::Config, where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& [k, _] : table)
        if (k.rfind(section + ".", 0) == 0) known = true;
      if (!known) throw Error(ErrorCode::Config, where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Config, where + ": expected key = value");
    if (section.empty()) throw Error(ErrorCode::Config, where + ": key outside any section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) throw Error(ErrorCode::Config, where + ": unknown key " + key);
    it->second(cfg, value, where);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_config(in, path.string());
}

}  // namespace fdfm
