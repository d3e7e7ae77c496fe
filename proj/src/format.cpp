#include "costrec/format.hpp"

#include <fmt/format.h>

namespace costrec {

std::string format_number(double x) {
  if (x == 0.0) return "0";
  return fmt::format("{:.12g}", x);
}

}  // namespace costrec

namespace costrec {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace costrec
