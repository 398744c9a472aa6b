#pragma once

// Run configuration: flat "key = value" lines grouped under [section]
// headers, '#' comments. Unknown sections or keys are rejected.

#include "fdfm/baselines.hpp"
#include "fdfm/evaluation.hpp"
#include "fdfm/model.hpp"
#include "fdfm/simulate.hpp"
#include "fdfm/trading.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace fdfm {

struct TradingConfig {
  int algo = 1;
  int t1 = 13;
  TradingOptions options;
  std::string weight_begin = "1985-01";
  std::string weight_end = "1993-12";
};

struct RunConfig {
  std::string model = "fdfm";  // fdfm | dns | rw
  FdfmConfig fdfm;
  double dns_alpha = kDnsAlpha;
  RollingSpec rolling;
  SynthesisSpec synthesis;
  TradingConfig trading;
  SimulationSpec simulation;
  std::string out_dir = ".";
  std::uint64_t seed = 7;

  void validate() const;
};

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// The accepted section.key names.
std::vector<std::string> config_keys();

}  // namespace fdfm
