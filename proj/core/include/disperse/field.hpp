#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "disperse/grid.hpp"
#include "disperse/profile.hpp"

namespace disperse {

/// Cell-centered samples of a function on a Grid1D. All values are finite.
class SpatialField {
 public:
  SpatialField(Grid1D grid, std::vector<double> values);
  /// Constant field.
  SpatialField(Grid1D grid, double value);

  static SpatialField from_function(const Grid1D& grid, const std::function<double(double)>& f);

  const Grid1D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const;
  double max() const;
  double sup_norm() const;
  bool all_positive() const;

  /// Throws InvalidInput naming `what` unless every value is > 0.
  void require_positive(std::string_view what) const;

  SpatialField& operator+=(const SpatialField& o);
  SpatialField& operator-=(const SpatialField& o);
  SpatialField& operator*=(double s);

  friend SpatialField operator+(SpatialField a, const SpatialField& b) { return a += b; }
  friend SpatialField operator-(SpatialField a, const SpatialField& b) { return a -= b; }
  friend SpatialField operator*(SpatialField a, double s) { return a *= s; }
  friend SpatialField operator*(double s, SpatialField a) { return a *= s; }

  /// Pointwise product / quotient / map.
  friend SpatialField hadamard(const SpatialField& a, const SpatialField& b);
  friend SpatialField divide(const SpatialField& a, const SpatialField& b);
  SpatialField map(const std::function<double(double)>& f) const;

 private:
  void require_same_grid(const SpatialField& o) const;

  Grid1D grid_;
  std::vector<double> values_;
};

/// Samples expr at every cell center; EvalError carries the failing x.
SpatialField sample(const ProfileExpr& expr, const Grid1D& grid);

/// Midpoint rule: h * sum(values), with compensated summation.
double integrate(const SpatialField& f);

/// Discrete weighted Dirichlet integral over interior interfaces,
/// sum_i w_{i+1/2} ((f_{i+1} - f_i)/h)^2 h with w_{i+1/2} the arithmetic mean.
double gradient_sq_weighted(const SpatialField& f, const SpatialField& weight);

/// Discrete inner product <f, g> = h * sum f_i g_i.
double inner(const SpatialField& f, const SpatialField& g);

/// True iff sin(angle(f, g)) > tol. Throws InvalidInput on a zero field.
bool linearly_independent(const SpatialField& f, const SpatialField& g, double tol = 1e-8);

/// Relative distance ||f - g||_inf / max(||f||_inf, ||g||_inf); 0 for identical fields.
double relative_sup_distance(const SpatialField& f, const SpatialField& g);

struct HullCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double relative_residual = 0.0;
};

/// Least-squares fit K ~ alpha*P + beta*Q. Returns the coefficients only when
/// both exceed tol and the relative residual is below tol. Throws InvalidInput
/// when P and Q are too close to dependent for the normal equations.
std::optional<HullCoefficients> positive_hull_coefficients(const SpatialField& K,
                                                          const SpatialField& P,
                                                          const SpatialField& Q,
                                                          double tol = 1e-8);

/// Unconstrained least-squares coefficients (no sign or residual filter).
HullCoefficients least_squares_pair(const SpatialField& K, const SpatialField& P,
                                    const SpatialField& Q);

/// CSV `x,value`, one row per cell, 17 significant digits.
void write_field_csv(std::ostream& out, const SpatialField& f);

}  // namespace disperse
