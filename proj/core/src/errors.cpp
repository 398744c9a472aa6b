#include "fdfm/errors.hpp"

namespace fdfm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGrid: return "invalid-grid";
    case ErrorCode::TooFewKnots: return "too-few-knots";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::DegenerateSeries: return "degenerate-series";
    case ErrorCode::ConvergenceFailure: return "convergence-failure";
    case ErrorCode::NonStationary: return "non-stationary";
    case ErrorCode::NumericalSingularity: return "numerical-singularity";
    case ErrorCode::RankDeficiency: return "rank-deficiency";
    case ErrorCode::DegenerateGcv: return "degenerate-gcv";
    case ErrorCode::SelectionFailure: return "selection-failure";
    case ErrorCode::DegenerateLoadings: return "degenerate-loadings";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Window: return "window";
    case ErrorCode::InfeasibleStudy: return "infeasible-study";
    case ErrorCode::Maturity: return "maturity";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::Data: return "data";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::Usage: return "usage";
  }
  return "unknown";
}

}  // namespace fdfm
