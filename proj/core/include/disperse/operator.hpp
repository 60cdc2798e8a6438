#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "disperse/field.hpp"
#include "disperse/tridiagonal.hpp"

namespace disperse {

/// Conservative discretization of u -> div[d a grad(u/P)] with zero flux of
/// u/P through both ends of the interval.
///
/// With w = u/P and conductance c_{i+1/2} = d (a_i + a_{i+1})/2, the interface
/// flux is F_{i+1/2} = c_{i+1/2} (w_{i+1} - w_i)/h, boundary fluxes are zero, and
///
///   (L u)_i = (F_{i+1/2} - F_{i-1/2}) / h.
///
/// Consequences used throughout the library: L P = 0 exactly (w is constant),
/// h * sum_i (L u)_i = 0 (fluxes telescope), and off-diagonal entries are
/// nonnegative so I - dt L is an M-matrix for every dt > 0.
class DispersalOperator {
 public:
  /// Throws InvalidInput if a or P is not strictly positive, d <= 0, or the
  /// fields live on different grids.
  static DispersalOperator assemble(const SpatialField& a, const SpatialField& strategy, double d);

  const Grid1D& grid() const noexcept { return strategy_.grid(); }
  const SpatialField& strategy() const noexcept { return strategy_; }
  const SpatialField& diffusivity() const noexcept { return a_; }
  double rate() const noexcept { return d_; }

  /// c_{i+1/2} = d * mean(a_i, a_{i+1}) for the n-1 interior interfaces.
  std::span<const double> conductance() const noexcept { return conductance_; }

  /// Matrix of L in u-coordinates.
  const TridiagonalBands& bands() const noexcept { return bands_; }
  double norm_inf() const { return bands_.norm_inf(); }

  /// Flux-form evaluation; exact on the kernel (apply(P) == 0 bit-for-bit).
  SpatialField apply(const SpatialField& u) const;
  void apply(std::span<const double> u, std::span<double> out) const;

  /// Same operator with the rate multiplier replaced.
  DispersalOperator with_rate(double d) const;

  /// CSV triplets `row,col,value` of the nonzero matrix entries.
  void write_triplets_csv(std::ostream& out) const;

 private:
  DispersalOperator(SpatialField a, SpatialField strategy, double d);

  SpatialField a_;
  SpatialField strategy_;
  double d_;
  std::vector<double> conductance_;
  TridiagonalBands bands_;
};

/// Coefficients that turn the operator into div[mu grad u - alpha u grad K]
/// with logistic growth u(K - u): P = exp((alpha/mu) K), a = mu P, r = K.
struct AdvectionCoefficients {
  SpatialField a;
  SpatialField strategy;
  SpatialField r;
};

/// Throws InvalidInput when mu <= 0.
AdvectionCoefficients advection_equivalent(double mu, double alpha, const SpatialField& K);

}  // namespace disperse
