#pragma once

#include <string>

namespace costrec {

/// Number formatting shared by every CSV and report writer: 12 significant
/// digits, '.' separator, negative zero printed as 0.
std::string format_number(double x);

}  // namespace costrec

namespace costrec {

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace costrec
