#pragma once

#include <cstddef>
#include <vector>

namespace disperse {

/// Uniform cell-centered grid on [x_left, x_right].
///
/// Cell i covers [x_left + i*h, x_left + (i+1)*h] and is represented by its
/// center. At least four cells are required so that every stencil has an
/// interior.
class Grid1D {
 public:
  static constexpr std::size_t kMinCells = 4;

  Grid1D(std::size_t n_cells, double x_left, double x_right);

  std::size_t n_cells() const noexcept { return n_cells_; }
  double x_left() const noexcept { return x_left_; }
  double x_right() const noexcept { return x_right_; }
  double length() const noexcept { return x_right_ - x_left_; }
  double h() const noexcept { return h_; }

  double center(std::size_t i) const noexcept {
    return x_left_ + (static_cast<double>(i) + 0.5) * h_;
  }
  std::vector<double> centers() const;

  friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
    return a.n_cells_ == b.n_cells_ && a.x_left_ == b.x_left_ &&
           a.x_right_ == b.x_right_;
  }

 private:
  std::size_t n_cells_;
  double x_left_;
  double x_right_;
  double h_;
};

}  // namespace disperse
