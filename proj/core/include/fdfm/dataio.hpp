#pragma once

// Yield panel CSV (header "date,<maturity>,...", dates YYYY-MM, values in
// annualized percent), number formatting and atomic file output.

#include "fdfm/panel.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace fdfm {

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& where);

/// Parses a panel in annualized percent. Schema violations throw Schema with
/// the row and column of the offending cell.
CurvePanel read_panel(std::istream& in, const std::string& source = "<input>");
/// Reads and converts to `units`.
CurvePanel load_panel(const std::filesystem::path& path,
                      YieldUnits units = YieldUnits::AnnualPercent);
/// Writes in annualized percent regardless of the panel's units.
void write_panel(std::ostream& out, const CurvePanel& panel);
std::string panel_to_csv(const CurvePanel& panel);

bool is_month_label(const std::string& s);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace fdfm
