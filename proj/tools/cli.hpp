#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdfm::cli {

/// Runs one command line (args excludes the program name). Errors are
/// printed to `err` as a single "error: <code>: <message>" line.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdfm::cli
