#include "fdfm/serialize.hpp"

#include "fdfm/dataio.hpp"
#include "fdfm/errors.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace fdfm {

namespace {

void put(std::ostream& out, const std::string& key, double v) {
  out << key << ' ' << format_double(v) << '\n';
}

void put(std::ostream& out, const std::string& key, long long v) {
  out << key << ' ' << v << '\n';
}

void put(std::ostream& out, const std::string& key, const Eigen::VectorXd& v) {
  out << key << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v(i));
  out << '\n';
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void put_process(std::ostream& out, const std::string& prefix, const ArProcess& p) {
  put(out, prefix + ".order", static_cast<long long>(p.order));
  put(out, prefix + ".coefficients", p.coefficients);
  put(out, prefix + ".intercept", p.intercept);
  put(out, prefix + ".innovation_variance", p.innovation_variance);
  if (p.has_regressors()) put(out, prefix + ".regressor_coefficients", *p.regressor_coefficients);
}

void put_matrix(std::ostream& out, const std::string& key, const Eigen::MatrixXd& m) {
  out << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
    out << '\n';
  }
}

// Reads "key value..." lines; matrices are a key line followed by rows.
class Document {
 public:
  explicit Document(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string key;
      ss >> key;
      std::vector<std::string> tokens;
      std::string t;
      while (ss >> t) tokens.push_back(t);
      if (key == "matrix") {
        if (tokens.size() != 3) throw Error(ErrorCode::Schema, "bad matrix line");
        const auto rows = std::stoll(tokens[1]);
        const auto cols = std::stoll(tokens[2]);
        Eigen::MatrixXd m(rows, cols);
        for (long long i = 0; i < rows; ++i) {
          if (!std::getline(in, line)) throw Error(ErrorCode::Schema, "truncated matrix " + tokens[0]);
          std::istringstream rs(line);
          for (long long j = 0; j < cols; ++j) {
            std::string cell;
            if (!(rs >> cell)) throw Error(ErrorCode::Schema, "short matrix row in " + tokens[0]);
            m(i, j) = parse_double(cell, tokens[0]);
          }
        }
        matrices_[tokens[0]] = std::move(m);
        continue;
      }
      if (!fields_.emplace(key, tokens).second)
        throw Error(ErrorCode::Schema, "duplicate key " + key);
    }
  }

  bool has(const std::string& key) const { return fields_.count(key) != 0; }
  bool has_matrix(const std::string& key) const { return matrices_.count(key) != 0; }

  const std::vector<std::string>& raw(const std::string& key) const {
    const auto it = fields_.find(key);
    if (it == fields_.end()) throw Error(ErrorCode::Schema, "missing key " + key);
    return it->second;
  }

  std::string text(const std::string& key) const {
    const auto& r = raw(key);
    if (r.size() != 1) throw Error(ErrorCode::Schema, "key " + key + " needs one value");
    return r[0];
  }

  double number(const std::string& key) const { return parse_double(text(key), key); }

  long long integer(const std::string& key) const {
    const auto s = text(key);
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw Error(ErrorCode::Schema, "key " + key + " is not an integer");
    return v;
  }

  Eigen::VectorXd vector(const std::string& key) const {
    const auto& r = raw(key);
    if (r.empty()) throw Error(ErrorCode::Schema, "key " + key + " has no length");
    const auto n = std::stoll(r[0]);
    if (n < 0 || static_cast<std::size_t>(n) + 1 != r.size())
      throw Error(ErrorCode::Schema, "key " + key + " length mismatch");
    Eigen::VectorXd v(n);
    for (long long i = 0; i < n; ++i) v(i) = parse_double(r[i + 1], key);
    return v;
  }

  const Eigen::MatrixXd& matrix(const std::string& key) const {
    const auto it = matrices_.find(key);
    if (it == matrices_.end()) throw Error(ErrorCode::Schema, "missing matrix " + key);
    return it->second;
  }

  ArProcess process(const std::string& prefix) const {
    ArProcess p;
    p.order = static_cast<int>(integer(prefix + ".order"));
    p.coefficients = vector(prefix + ".coefficients");
    if (p.coefficients.size() != p.order) throw Error(ErrorCode::Schema, prefix + " order mismatch");
    p.intercept = number(prefix + ".intercept");
    p.innovation_variance = number(prefix + ".innovation_variance");
    if (has(prefix + ".regressor_coefficients"))
      p.regressor_coefficients = vector(prefix + ".regressor_coefficients");
    return p;
  }

 private:
  std::map<std::string, std::vector<std::string>> fields_;
  std::map<std::string, Eigen::MatrixXd> matrices_;
};

void expect_kind(Document& doc, const std::string& kind) {
  if (doc.text("format") != kind) throw Error(ErrorCode::Schema, "not a " + kind + " document");
  if (doc.integer("version") != 1) throw Error(ErrorCode::Schema, "unsupported document version");
}

}  // namespace

void write_model(std::ostream& out, const FdfmModel& model) {
  out << "format fdfm-model\n";
  put(out, "version", 1LL);
  put(out, "knots", model.grid.as_vector());
  put(out, "factors", static_cast<long long>(model.factor_count()));
  put(out, "sigma2", model.sigma2);
  put(out, "lambdas", vec(model.lambdas));
  for (int k = 0; k < model.factor_count(); ++k) {
    const std::string f = "factor" + std::to_string(k + 1);
    put(out, f + ".loading_values", model.loadings[k].values());
    put(out, f + ".loading_second_derivatives", model.loadings[k].second_derivatives());
    put_process(out, f + ".ar", model.factors[k]);
  }
  put_matrix(out, "matrix scores", model.scores);
  if (model.regressors) put_matrix(out, "matrix regressors", model.regressors->rows);
  put(out, "fit_trace", vec(model.fit_trace));
  const auto& d = model.diagnostics;
  put(out, "converged", static_cast<long long>(d.converged));
  put(out, "iterations", static_cast<long long>(d.iterations));
  put(out, "final_change", d.final_change);
  put(out, "damped_steps", static_cast<long long>(d.damped_steps));
  put(out, "stalled", static_cast<long long>(d.stalled));
}

std::string model_to_string(const FdfmModel& model) {
  std::ostringstream out;
  write_model(out, model);
  return out.str();
}

FdfmModel read_model(std::istream& in) {
  Document doc(in);
  expect_kind(doc, "fdfm-model");
  const auto knots = doc.vector("knots");
  KnotGrid grid(std::vector<double>(knots.data(), knots.data() + knots.size()));
  const auto K = doc.integer("factors");
  if (K < 1) throw Error(ErrorCode::Schema, "factor count must be positive");
  const auto lambdas = doc.vector("lambdas");
  if (lambdas.size() != K) throw Error(ErrorCode::Schema, "one lambda per factor required");
  const auto& scores = doc.matrix("scores");
  if (scores.cols() != K) throw Error(ErrorCode::Schema, "score matrix must have K columns");
  FdfmModel model{grid, {}, {}, scores, doc.number("sigma2"),
                  std::vector<double>(lambdas.data(), lambdas.data() + K), {}, {}, {}};
  for (long long k = 0; k < K; ++k) {
    const std::string f = "factor" + std::to_string(k + 1);
    auto values = doc.vector(f + ".loading_values");
    auto gamma = doc.vector(f + ".loading_second_derivatives");
    if (values.size() != knots.size() || gamma.size() != knots.size())
      throw Error(ErrorCode::Schema, f + " loading does not match the knots");
    model.loadings.emplace_back(grid, std::move(values), std::move(gamma));
    model.factors.push_back(doc.process(f + ".ar"));
  }
  if (doc.has_matrix("regressors")) model.regressors = RegressorPanel{doc.matrix("regressors")};
  const auto trace = doc.vector("fit_trace");
  model.fit_trace.assign(trace.data(), trace.data() + trace.size());
  model.diagnostics.converged = doc.integer("converged") != 0;
  model.diagnostics.iterations = static_cast<int>(doc.integer("iterations"));
  model.diagnostics.final_change = doc.number("final_change");
  model.diagnostics.damped_steps = static_cast<int>(doc.integer("damped_steps"));
  model.diagnostics.stalled = doc.integer("stalled") != 0;
  return model;
}

void write_dns_model(std::ostream& out, const DnsModel& model) {
  out << "format dns-model\n";
  put(out, "version", 1LL);
  put(out, "alpha", model.alpha);
  put(out, "knots", model.grid.as_vector());
  for (int k = 0; k < 3; ++k) put_process(out, "factor" + std::to_string(k + 1) + ".ar", model.processes[k]);
  put_matrix(out, "matrix factor_series", model.factor_series);
}

DnsModel read_dns_model(std::istream& in) {
  Document doc(in);
  expect_kind(doc, "dns-model");
  const auto knots = doc.vector("knots");
  DnsModel model{doc.number("alpha"), doc.matrix("factor_series"), {},
                 KnotGrid(std::vector<double>(knots.data(), knots.data() + knots.size()))};
  if (model.factor_series.cols() != 3) throw Error(ErrorCode::Schema, "DNS needs three factor series");
  for (int k = 0; k < 3; ++k) model.processes.push_back(doc.process("factor" + std::to_string(k + 1) + ".ar"));
  return model;
}

std::string model_kind(const std::string& document) {
  if (document.rfind("format fdfm-model", 0) == 0) return "fdfm";
  if (document.rfind("format dns-model", 0) == 0) return "dns";
  throw Error(ErrorCode::Schema, "unrecognized model document");
}

}  // namespace fdfm
