#include "disperse/tridiagonal.hpp"

#include <cmath>

#include <fmt/core.h>

#include "disperse/errors.hpp"

namespace disperse {

void TridiagonalBands::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += sub[i] * x[i - 1];
    if (i + 1 < n) acc += super[i] * x[i + 1];
    y[i] = acc;
  }
}

double TridiagonalBands::norm_inf() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    m = std::max(m, std::abs(sub[i]) + std::abs(diag[i]) + std::abs(super[i]));
  }
  return m;
}

TridiagonalLU::TridiagonalLU(const TridiagonalBands& a)
    : sub_(a.sub), super_(a.super), pivot_(a.size()) {
  const std::size_t n = a.size();
  if (n == 0) throw SingularMatrix("empty tridiagonal system");
  // pivot_[i] = u_ii of the LU factors; sub_[i] becomes the multiplier l_i.
  pivot_[0] = a.diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (pivot_[i - 1] == 0.0 || !std::isfinite(pivot_[i - 1])) {
      throw SingularMatrix(fmt::format("zero pivot in row {}", i - 1));
    }
    sub_[i] = a.sub[i] / pivot_[i - 1];
    pivot_[i] = a.diag[i] - sub_[i] * a.super[i - 1];
  }
  if (pivot_[n - 1] == 0.0 || !std::isfinite(pivot_[n - 1])) {
    throw SingularMatrix(fmt::format("zero pivot in row {}", n - 1));
  }
  inv_pivot_.resize(n);
  for (std::size_t i = 0; i < n; ++i) inv_pivot_[i] = 1.0 / pivot_[i];
}

void TridiagonalLU::solve(std::span<const double> rhs, std::span<double> x) const {
  const std::size_t n = size();
  x[0] = rhs[0];
  for (std::size_t i = 1; i < n; ++i) x[i] = rhs[i] - sub_[i] * x[i - 1];
  x[n - 1] *= inv_pivot_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - super_[i] * x[i + 1]) * inv_pivot_[i];
}

void TridiagonalLU::solve_pair(const TridiagonalLU& a, std::span<const double> rhs_a,
                               std::span<double> x_a, const TridiagonalLU& b,
                               std::span<const double> rhs_b, std::span<double> x_b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw InvalidInput("solve_pair: systems differ in size");
  x_a[0] = rhs_a[0];
  x_b[0] = rhs_b[0];
  for (std::size_t i = 1; i < n; ++i) {
    x_a[i] = rhs_a[i] - a.sub_[i] * x_a[i - 1];
    x_b[i] = rhs_b[i] - b.sub_[i] * x_b[i - 1];
  }
  x_a[n - 1] *= a.inv_pivot_[n - 1];
  x_b[n - 1] *= b.inv_pivot_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x_a[i] = (x_a[i] - a.super_[i] * x_a[i + 1]) * a.inv_pivot_[i];
    x_b[i] = (x_b[i] - b.super_[i] * x_b[i + 1]) * b.inv_pivot_[i];
  }
}

std::vector<double> TridiagonalLU::solve(std::span<const double> rhs) const {
  std::vector<double> x(size());
  solve(rhs, x);
  return x;
}

std::vector<double> solve_tridiagonal(const TridiagonalBands& a, std::span<const double> rhs) {
  return TridiagonalLU(a).solve(rhs);
}

}  // namespace disperse
