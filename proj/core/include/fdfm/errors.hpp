#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fdfm {

// Stable identifiers; the CLI prints these verbatim in its one-line error.
enum class ErrorCode {
  InvalidGrid,
  TooFewKnots,
  Dimension,
  DegenerateSeries,
  ConvergenceFailure,
  NonStationary,
  NumericalSingularity,
  RankDeficiency,
  DegenerateGcv,
  SelectionFailure,
  DegenerateLoadings,
  Domain,
  Window,
  InfeasibleStudy,
  Maturity,
  OutOfRange,
  Data,
  Schema,
  Config,
  Io,
  Usage,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fdfm
