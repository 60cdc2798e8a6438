#pragma once

#include <span>
#include <vector>

namespace disperse {

/// Three bands of an n x n tridiagonal matrix. sub[0] and super[n-1] are unused
/// and kept at zero so that row i reads sub[i]*x[i-1] + diag[i]*x[i] + super[i]*x[i+1].
struct TridiagonalBands {
  std::vector<double> sub;
  std::vector<double> diag;
  std::vector<double> super;

  explicit TridiagonalBands(std::size_t n = 0) : sub(n, 0.0), diag(n, 0.0), super(n, 0.0) {}

  std::size_t size() const noexcept { return diag.size(); }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;

  /// max_i sum_j |A_ij|
  double norm_inf() const;
};

/// Thomas-algorithm LU factorization without pivoting. Stable for diagonally
/// dominant (row or column) and for definite matrices, which covers every
/// system this library builds. Factor once, solve many times.
class TridiagonalLU {
 public:
  /// Throws SingularMatrix on a zero or non-finite pivot.
  explicit TridiagonalLU(const TridiagonalBands& a);

  std::size_t size() const noexcept { return pivot_.size(); }

  void solve(std::span<const double> rhs, std::span<double> x) const;
  std::vector<double> solve(std::span<const double> rhs) const;

  /// Solves two independent systems of equal size in one sweep; the two
  /// recurrences interleave, which roughly halves the latency-bound cost.
  static void solve_pair(const TridiagonalLU& a, std::span<const double> rhs_a, std::span<double> x_a,
                         const TridiagonalLU& b, std::span<const double> rhs_b, std::span<double> x_b);

 private:
  std::vector<double> sub_;
  std::vector<double> super_;
  std::vector<double> pivot_;
  std::vector<double> inv_pivot_;
};

/// One-shot convenience wrapper.
std::vector<double> solve_tridiagonal(const TridiagonalBands& a, std::span<const double> rhs);

}  // namespace disperse
