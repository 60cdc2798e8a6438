#include "disperse/field.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "disperse/csv.hpp"
#include "disperse/errors.hpp"

namespace disperse {

namespace {

// Neumaier-compensated sum.
double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

void require_same_grid(const SpatialField& a, const SpatialField& b) {
  if (!(a.grid() == b.grid())) throw InvalidInput("fields live on different grids");
}

}  // namespace

SpatialField::SpatialField(Grid1D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_cells()) {
    throw InvalidInput(fmt::format("field has {} values for a grid of {} cells", values_.size(),
                                   grid_.n_cells()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidInput(fmt::format("non-finite field value at cell {} (x={})", i, grid_.center(i)));
    }
  }
}

SpatialField::SpatialField(Grid1D grid, double value)
    : SpatialField(grid, std::vector<double>(grid.n_cells(), value)) {}

SpatialField SpatialField::from_function(const Grid1D& grid,
                                         const std::function<double(double)>& f) {
  std::vector<double> v(grid.n_cells());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.center(i));
  return SpatialField(grid, std::move(v));
}

double SpatialField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double SpatialField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double SpatialField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool SpatialField::all_positive() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

void SpatialField::require_positive(std::string_view what) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0)) {
      throw InvalidInput(fmt::format("{} must be positive, got {} at x={}", what, values_[i],
                                     grid_.center(i)));
    }
  }
}

void SpatialField::require_same_grid(const SpatialField& o) const {
  disperse::require_same_grid(*this, o);
}

SpatialField& SpatialField::operator+=(const SpatialField& o) {
  require_same_grid(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

SpatialField& SpatialField::operator-=(const SpatialField& o) {
  require_same_grid(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

SpatialField& SpatialField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

SpatialField hadamard(const SpatialField& a, const SpatialField& b) {
  require_same_grid(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values_[i] * b.values_[i];
  return SpatialField(a.grid_, std::move(out));
}

SpatialField divide(const SpatialField& a, const SpatialField& b) {
  require_same_grid(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values_[i] / b.values_[i];
  return SpatialField(a.grid_, std::move(out));
}

SpatialField SpatialField::map(const std::function<double(double)>& f) const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), f);
  return SpatialField(grid_, std::move(out));
}

SpatialField sample(const ProfileExpr& expr, const Grid1D& grid) {
  std::vector<double> v(grid.n_cells());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = expr.evaluate(grid.center(i));
  return SpatialField(grid, std::move(v));
}

double integrate(const SpatialField& f) { return f.grid().h() * compensated_sum(f.values()); }

double gradient_sq_weighted(const SpatialField& f, const SpatialField& weight) {
  require_same_grid(f, weight);
  const double h = f.grid().h();
  std::vector<double> terms(f.size() - 1);
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double w = 0.5 * (weight[i] + weight[i + 1]);
    const double g = (f[i + 1] - f[i]) / h;
    terms[i] = w * g * g * h;
  }
  return compensated_sum(terms);
}

double inner(const SpatialField& f, const SpatialField& g) { return integrate(hadamard(f, g)); }

bool linearly_independent(const SpatialField& f, const SpatialField& g, double tol) {
  require_same_grid(f, g);
  const double ff = inner(f, f);
  const double gg = inner(g, g);
  if (ff == 0.0 || gg == 0.0) throw InvalidInput("linear independence test on a zero field");
  const double fg = inner(f, g);
  const double sin2 = 1.0 - (fg * fg) / (ff * gg);
  return sin2 > tol * tol;
}

double relative_sup_distance(const SpatialField& f, const SpatialField& g) {
  const double scale = std::max(f.sup_norm(), g.sup_norm());
  if (scale == 0.0) return 0.0;
  return (f - g).sup_norm() / scale;
}

HullCoefficients least_squares_pair(const SpatialField& K, const SpatialField& P,
                                    const SpatialField& Q) {
  require_same_grid(K, P);
  require_same_grid(K, Q);
  const double pp = inner(P, P);
  const double qq = inner(Q, Q);
  const double pq = inner(P, Q);
  const double kp = inner(K, P);
  const double kq = inner(K, Q);
  const double det = pp * qq - pq * pq;
  if (!(pp > 0.0) || !(qq > 0.0) || det <= 1e-14 * pp * qq) {
    throw InvalidInput("ill-conditioned normal equations: P and Q are nearly dependent");
  }
  HullCoefficients c;
  c.alpha = (kp * qq - kq * pq) / det;
  c.beta = (kq * pp - kp * pq) / det;
  const SpatialField residual = K - c.alpha * P - c.beta * Q;
  const double kk = std::sqrt(inner(K, K));
  c.relative_residual = kk > 0.0 ? std::sqrt(inner(residual, residual)) / kk : 0.0;
  return c;
}

std::optional<HullCoefficients> positive_hull_coefficients(const SpatialField& K,
                                                          const SpatialField& P,
                                                          const SpatialField& Q, double tol) {
  const HullCoefficients c = least_squares_pair(K, P, Q);
  if (c.alpha > tol && c.beta > tol && c.relative_residual < tol) return c;
  return std::nullopt;
}

void write_field_csv(std::ostream& out, const SpatialField& f) {
  out << "x,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << csv::real(f.grid().center(i)) << ',' << csv::real(f[i]) << '\n';
  }
}

}  // namespace disperse
