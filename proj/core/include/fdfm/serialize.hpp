#pragma once

// Keyed text documents for fitted models. Every number is written with 17
// significant digits so a write/read cycle is exact.

#include "fdfm/baselines.hpp"
#include "fdfm/model.hpp"

#include <iosfwd>
#include <string>

namespace fdfm {

void write_model(std::ostream& out, const FdfmModel& model);
FdfmModel read_model(std::istream& in);
std::string model_to_string(const FdfmModel& model);

void write_dns_model(std::ostream& out, const DnsModel& model);
DnsModel read_dns_model(std::istream& in);

/// "fdfm" or "dns", from the first line of a model document.
std::string model_kind(const std::string& document);

}  // namespace fdfm
