#include "disperse/operator.hpp"

#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "disperse/csv.hpp"
#include "disperse/errors.hpp"

namespace disperse {

DispersalOperator::DispersalOperator(SpatialField a, SpatialField strategy, double d)
    : a_(std::move(a)), strategy_(std::move(strategy)), d_(d) {
  const std::size_t n = strategy_.size();
  const double h = strategy_.grid().h();
  const double inv_h2 = 1.0 / (h * h);

  conductance_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) conductance_[i] = d_ * 0.5 * (a_[i] + a_[i + 1]);

  bands_ = TridiagonalBands(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double right = i + 1 < n ? conductance_[i] * inv_h2 : 0.0;
    const double left = i > 0 ? conductance_[i - 1] * inv_h2 : 0.0;
    if (i > 0) bands_.sub[i] = left / strategy_[i - 1];
    if (i + 1 < n) bands_.super[i] = right / strategy_[i + 1];
    bands_.diag[i] = -(left + right) / strategy_[i];
  }
}

DispersalOperator DispersalOperator::assemble(const SpatialField& a, const SpatialField& strategy,
                                              double d) {
  if (!(a.grid() == strategy.grid())) throw InvalidInput("a and strategy live on different grids");
  a.require_positive("diffusivity a");
  strategy.require_positive("strategy");
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw InvalidInput(fmt::format("rate multiplier d must be positive, got {}", d));
  }
  return DispersalOperator(a, strategy, d);
}

void DispersalOperator::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t n = strategy_.size();
  const double h = grid().h();
  double flux_left = 0.0;
  double w_prev = u[0] / strategy_[0];
  for (std::size_t i = 0; i < n; ++i) {
    double flux_right = 0.0;
    double w_next = 0.0;
    if (i + 1 < n) {
      w_next = u[i + 1] / strategy_[i + 1];
      flux_right = conductance_[i] * (w_next - w_prev) / h;
    }
    out[i] = (flux_right - flux_left) / h;
    flux_left = flux_right;
    w_prev = w_next;
  }
}

SpatialField DispersalOperator::apply(const SpatialField& u) const {
  if (!(u.grid() == grid())) throw InvalidInput("apply: field and operator grids differ");
  std::vector<double> out(u.size());
  apply(u.values(), out);
  return SpatialField(grid(), std::move(out));
}

DispersalOperator DispersalOperator::with_rate(double d) const {
  return assemble(a_, strategy_, d);
}

void DispersalOperator::write_triplets_csv(std::ostream& out) const {
  out << "row,col,value\n";
  const std::size_t n = bands_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out << i << ',' << i - 1 << ',' << csv::real(bands_.sub[i]) << '\n';
    out << i << ',' << i << ',' << csv::real(bands_.diag[i]) << '\n';
    if (i + 1 < n) out << i << ',' << i + 1 << ',' << csv::real(bands_.super[i]) << '\n';
  }
}

AdvectionCoefficients advection_equivalent(double mu, double alpha, const SpatialField& K) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidInput(fmt::format("advection mapping needs mu > 0, got {}", mu));
  }
  const double ratio = alpha / mu;
  SpatialField strategy = K.map([ratio](double k) { return std::exp(ratio * k); });
  SpatialField a = mu * strategy;
  return AdvectionCoefficients{std::move(a), std::move(strategy), K};
}

}  // namespace disperse
