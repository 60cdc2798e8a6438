#include "disperse/grid.hpp"

#include <cmath>

#include <fmt/core.h>

#include "disperse/errors.hpp"

namespace disperse {

Grid1D::Grid1D(std::size_t n_cells, double x_left, double x_right)
    : n_cells_(n_cells), x_left_(x_left), x_right_(x_right), h_(0.0) {
  if (n_cells < kMinCells) {
    throw InvalidInput(fmt::format("grid needs at least {} cells, got {}", kMinCells, n_cells));
  }
  if (!std::isfinite(x_left) || !std::isfinite(x_right) || !(x_right > x_left)) {
    throw InvalidInput(fmt::format("grid endpoints must satisfy x_left < x_right, got [{}, {}]",
                                   x_left, x_right));
  }
  h_ = (x_right - x_left) / static_cast<double>(n_cells);
}

std::vector<double> Grid1D::centers() const {
  std::vector<double> xs(n_cells_);
  for (std::size_t i = 0; i < n_cells_; ++i) xs[i] = center(i);
  return xs;
}

}  // namespace disperse
