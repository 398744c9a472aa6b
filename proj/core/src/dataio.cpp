#include "fdfm/dataio.hpp"

#include "fdfm/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fdfm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw Error(ErrorCode::Schema, where + ": not a number: '" + text + "'");
  return v;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string at(const std::string& source, std::size_t row, std::size_t col) {
  return source + ": row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

bool is_month_label(const std::string& s) {
  if (s.size() != 7 || s[4] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  return month >= 1 && month <= 12;
}

CurvePanel read_panel(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::Schema, source + ": empty file");
  if (header.front() != "date")
    throw Error(ErrorCode::Schema, at(source, row, 1) + ": header must start with 'date'");
  if (header.size() < 4)
    throw Error(ErrorCode::Schema, source + ": need at least three maturity columns");
  std::vector<double> maturities;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const double t = parse_double(header[c], at(source, row, c + 1));
    if (!maturities.empty() && !(t > maturities.back()))
      throw Error(ErrorCode::Schema, at(source, row, c + 1) +
                                         ": maturities must be strictly increasing");
    maturities.push_back(t);
  }
  std::vector<std::string> dates;
  std::vector<std::vector<double>> values;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::Schema, at(source, row, cells.size()) + ": expected " +
                                         std::to_string(header.size()) + " cells");
    if (!is_month_label(cells[0]))
      throw Error(ErrorCode::Schema, at(source, row, 1) + ": date must be YYYY-MM");
    if (!dates.empty() && !(cells[0] > dates.back()))
      throw Error(ErrorCode::Schema, at(source, row, 1) + ": dates must be increasing");
    dates.push_back(cells[0]);
    std::vector<double> r;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) throw Error(ErrorCode::Schema, at(source, row, c + 1) + ": missing value");
      r.push_back(parse_double(cells[c], at(source, row, c + 1)));
    }
    values.push_back(std::move(r));
  }
  if (values.empty()) throw Error(ErrorCode::Schema, source + ": no data rows");
  Eigen::MatrixXd data(values.size(), maturities.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = 0; j < maturities.size(); ++j) data(i, j) = values[i][j];
  try {
    return CurvePanel(std::move(data), KnotGrid(maturities), std::move(dates));
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, source + ": " + e.what());
  }
}

CurvePanel load_panel(const std::filesystem::path& path, YieldUnits units) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_panel(in, path.string()).in_units(units);
}

void write_panel(std::ostream& out, const CurvePanel& panel) {
  const auto p = panel.in_units(YieldUnits::AnnualPercent);
  out << "date";
  for (double t : p.grid().knots()) out << ',' << format_double(t);
  out << '\n';
  for (Eigen::Index i = 0; i < p.periods(); ++i) {
    if (p.has_dates()) {
      out << p.dates()[i];
    } else {
      // Synthetic month labels starting at 2000-01.
      char buf[48];
      const auto k = static_cast<long>(i);
      std::snprintf(buf, sizeof buf, "%04ld-%02ld", 2000 + k / 12, k % 12 + 1);
      out << buf;
    }
    for (Eigen::Index j = 0; j < p.maturities(); ++j) out << ',' << format_double(p.data()(i, j));
    out << '\n';
  }
}

std::string panel_to_csv(const CurvePanel& panel) {
  std::ostringstream out;
  write_panel(out, panel);
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path.string());
  }
}

}  // namespace fdfm
