#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace disperse::csv {

/// Shortest-stable text for a real: 17 significant digits, '%g' style.
std::string real(double v);

/// Writes one comma-separated row of already formatted cells.
void write_row(std::ostream& out, std::span<const std::string> cells);

}  // namespace disperse::csv
