#include "disperse/csv.hpp"

#include <ostream>

#include <fmt/format.h>

namespace disperse::csv {

std::string real(double v) {
  if (v == 0.0) return "0";  // folds -0 so output does not depend on rounding sign
  return fmt::format("{:.17g}", v);
}

void write_row(std::ostream& out, std::span<const std::string> cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace disperse::csv
