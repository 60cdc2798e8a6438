#include "disperse/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <fmt/core.h>

#include "disperse/csv.hpp"
#include "disperse/errors.hpp"

namespace disperse {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e` (size n-1).
struct SymTridiagonal {
  std::vector<double> d;
  std::vector<double> e;

  std::size_t size() const { return d.size(); }

  double gershgorin_low() const {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) lo = std::min(lo, d[i] - radius(i));
    return lo;
  }
  double gershgorin_high() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) hi = std::max(hi, d[i] + radius(i));
    return hi;
  }
  double radius(std::size_t i) const {
    double r = 0.0;
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < size()) r += std::abs(e[i]);
    return r;
  }

  // Number of eigenvalues strictly below lambda (Sturm sequence of LDL^T pivots).
  std::size_t count_below(double lambda, double pivmin) const {
    std::size_t count = 0;
    double q = d[0] - lambda;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < size(); ++i) {
      q = d[i] - lambda - e[i - 1] * e[i - 1] / q;
      if (std::abs(q) < pivmin) q = -pivmin;
      if (q < 0.0) ++count;
    }
    return count;
  }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = d[i] * x[i];
      if (i > 0) acc += e[i - 1] * x[i - 1];
      if (i + 1 < n) acc += e[i] * x[i + 1];
      y[i] = acc;
    }
  }

  TridiagonalLU shifted_factor(double shift) const {
    TridiagonalBands b(size());
    for (std::size_t i = 0; i < size(); ++i) {
      b.diag[i] = d[i] - shift;
      if (i > 0) b.sub[i] = e[i - 1];
      if (i + 1 < size()) b.super[i] = e[i];
    }
    return TridiagonalLU(b);
  }
};

// B^{-1/2} A B^{-1/2} for A w = sigma B w, B = diag(h S).
SymTridiagonal symmetric_form(const LinearizedProblem& p) {
  const DispersalOperator& op = p.op;
  const SpatialField& s = op.strategy();
  const std::size_t n = s.size();
  const double h = op.grid().h();
  const double inv_h2 = 1.0 / (h * h);
  const auto cond = op.conductance();

  SymTridiagonal t;
  t.d.resize(n);
  t.e.resize(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? cond[i - 1] : 0.0;
    const double right = i + 1 < n ? cond[i] : 0.0;
    t.d[i] = -(left + right) * inv_h2 / s[i] + p.potential[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) t.e[i] = cond[i] * inv_h2 / std::sqrt(s[i] * s[i + 1]);
  return t;
}

double norm2(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

struct IterationOutcome {
  std::vector<double> z;
  std::size_t iterations = 0;
};

// Inverse iteration for the top eigenvector. The shift always stays above the
// largest eigenvalue (verified by Sturm count), so every factored matrix is
// negative definite and the pivot-free LU is safe. With `adaptive` the shift
// moves down to rho + ||T z - rho z|| once that bound is certified.
IterationOutcome top_eigenvector(const SymTridiagonal& t, std::vector<double> z, double shift,
                                 bool adaptive, double scale, double pivmin,
                                 std::size_t max_iterations) {
  const std::size_t n = t.size();
  const double delta = 1e-12 * scale;
  std::vector<double> y(n);
  std::vector<double> tz(n);
  double prev_res = std::numeric_limits<double>::infinity();
  std::optional<TridiagonalLU> lu(t.shifted_factor(shift));

  const double nz = norm2(z);
  for (double& v : z) v /= nz;

  for (std::size_t it = 1; it <= max_iterations; ++it) {
    lu->solve(z, y);
    double sum = 0.0;
    for (double v : y) sum += v;
    const double sign = sum < 0.0 ? -1.0 : 1.0;
    const double ny = norm2(y);
    for (std::size_t i = 0; i < n; ++i) z[i] = sign * y[i] / ny;

    t.multiply(z, tz);
    double rho = 0.0;
    for (std::size_t i = 0; i < n; ++i) rho += z[i] * tz[i];
    double res2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) res2 += (tz[i] - rho * z[i]) * (tz[i] - rho * z[i]);
    const double res = std::sqrt(res2);

    const bool at_floor = res <= 4.0 * kEps * scale * std::sqrt(static_cast<double>(n));
    const bool stalled = res < 1e-9 * scale && res >= 0.9 * prev_res;
    if (at_floor || stalled) return IterationOutcome{std::move(z), it};
    prev_res = res;

    if (adaptive) {
      const double candidate = rho + res + delta;
      if (candidate < shift && t.count_below(candidate, pivmin) == n) {
        shift = candidate;
        lu.emplace(t.shifted_factor(shift));
      }
    }
  }
  throw ConvergenceError(fmt::format("principal eigenvector: no convergence in {} iterations",
                                     max_iterations),
                         prev_res);
}

}  // namespace

void EigenResult::write_csv(std::ostream& out) const {
  out << "x,psi\n";
  for (std::size_t i = 0; i < psi.size(); ++i) {
    out << csv::real(psi.grid().center(i)) << ',' << csv::real(psi[i]) << '\n';
  }
}

void EigenResult::write_summary(std::ostream& out) const {
  out << "sigma1,residual,iterations\n"
      << csv::real(sigma1) << ',' << csv::real(residual) << ',' << iterations << '\n';
}

EigenResult principal_eigen(const LinearizedProblem& problem, const EigenOptions& options) {
  if (!(problem.potential.grid() == problem.op.grid())) {
    throw InvalidInput("potential and operator live on different grids");
  }
  const SymTridiagonal t = symmetric_form(problem);
  const std::size_t n = t.size();
  const double lo = t.gershgorin_low();
  const double hi = t.gershgorin_high();
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
  const double pivmin = std::numeric_limits<double>::min() * 1e6 * scale;

  EigenMethod method = options.method;
  if (method == EigenMethod::Auto) {
    method = n <= EigenOptions::kDenseLimit ? EigenMethod::Bisection : EigenMethod::InverseIteration;
  }

  // Start from w = const, i.e. psi = strategy.
  const SpatialField& s = problem.op.strategy();
  std::vector<double> z0(n);
  for (std::size_t i = 0; i < n; ++i) z0[i] = std::sqrt(s[i]);

  std::size_t iterations = 0;
  IterationOutcome vec;
  if (method == EigenMethod::Bisection) {
    double a = lo;
    double b = hi;
    while (b - a > 2.0 * kEps * std::max(std::abs(a), std::abs(b)) + pivmin &&
           iterations < options.max_iterations) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (t.count_below(mid, pivmin) == n) {
        b = mid;
      } else {
        a = mid;
      }
      ++iterations;
    }
    const double shift = b + std::max(1e-10 * scale, 4.0 * kEps * scale);
    vec = top_eigenvector(t, z0, shift, false, scale, pivmin, options.max_iterations);
  } else {
    const double shift = hi + 1e-6 * scale;
    vec = top_eigenvector(t, z0, shift, true, scale, pivmin, options.max_iterations);
  }
  iterations += vec.iterations;

  const double h = problem.op.grid().h();
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i) psi[i] = vec.z[i] * std::sqrt(s[i] / h);
  double mean = 0.0;
  for (double v : psi) mean += v;
  if (mean < 0.0) {
    for (double& v : psi) v = -v;
  }
  const double peak = *std::max_element(psi.begin(), psi.end());
  for (double& v : psi) v /= peak;

  EigenResult result{0.0, SpatialField(problem.op.grid(), std::move(psi)), 0.0, iterations, method};
  result.sigma1 = rayleigh_quotient(problem, result.psi);

  const SpatialField Lpsi = problem.op.apply(result.psi);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res = std::max(res, std::abs(Lpsi[i] + (problem.potential[i] - result.sigma1) * result.psi[i]));
  }
  result.residual = res;
  return result;
}

double rayleigh_quotient(const LinearizedProblem& problem, const SpatialField& trial) {
  const DispersalOperator& op = problem.op;
  const SpatialField& s = op.strategy();
  const SpatialField w = divide(trial, s);
  const SpatialField weight = op.rate() * op.diffusivity();
  const SpatialField trial_sq_over_s = hadamard(trial, w);
  const double denom = integrate(trial_sq_over_s);
  if (!(denom > 0.0)) throw InvalidInput("Rayleigh quotient of a zero trial function");
  const double num = -gradient_sq_weighted(w, weight) +
                     integrate(hadamard(problem.potential, trial_sq_over_s));
  return num / denom;
}

LinearizedProblem invasion_problem(const Scenario& scenario, const SpeciesParams& invader,
                                   const SpatialField& resident) {
  const SpatialField& K = scenario.K;
  std::vector<double> c(K.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = invader.r_mult * scenario.r[i] * (1.0 - resident[i] / K[i]);
  }
  return LinearizedProblem{DispersalOperator::assemble(scenario.a, invader.strategy, invader.d),
                           SpatialField(K.grid(), std::move(c))};
}

const Witness* InstabilityReport::find(const std::string& name) const {
  for (const Witness& w : witnesses) {
    if (w.name == name) return &w;
  }
  return nullptr;
}

InstabilityReport instability_certificates(const Scenario& scenario, const SpatialField& u_star,
                                           const SpatialField& v_star,
                                           const EigenOptions& options) {
  const SpatialField zero(scenario.grid(), 0.0);
  const LinearizedProblem u_zero = invasion_problem(scenario, scenario.u, zero);
  const LinearizedProblem v_zero = invasion_problem(scenario, scenario.v, zero);
  const LinearizedProblem v_vs_u = invasion_problem(scenario, scenario.v, u_star);
  const LinearizedProblem u_vs_v = invasion_problem(scenario, scenario.u, v_star);

  InstabilityReport report;
  report.sigma_u_at_zero = principal_eigen(u_zero, options).sigma1;
  report.sigma_v_at_zero = principal_eigen(v_zero, options).sigma1;
  report.sigma_v_at_u_star = principal_eigen(v_vs_u, options).sigma1;
  report.sigma_u_at_v_star = principal_eigen(u_vs_v, options).sigma1;

  const SpatialField& K = scenario.K;
  const SpatialField& P = scenario.u.strategy;
  const SpatialField& Q = scenario.v.strategy;

  std::optional<HullCoefficients> hull;
  if (linearly_independent(P, Q)) hull = positive_hull_coefficients(K, P, Q);
  if (hull) {
    report.witnesses.push_back({"sqrt_beta_Q", "v", rayleigh_quotient(v_vs_u, std::sqrt(hull->beta) * Q)});
    report.witnesses.push_back({"sqrt_alpha_P", "u", rayleigh_quotient(u_vs_v, std::sqrt(hull->alpha) * P)});
  }
  const auto root = [](double v) { return std::sqrt(v); };
  report.witnesses.push_back({"sqrt_KP", "u", rayleigh_quotient(u_vs_v, hadamard(K, P).map(root))});
  report.witnesses.push_back({"sqrt_KQ", "v", rayleigh_quotient(v_vs_u, hadamard(K, Q).map(root))});
  report.witnesses.push_back({"v_star", "u", rayleigh_quotient(u_vs_v, v_star)});
  report.witnesses.push_back({"u_star", "v", rayleigh_quotient(v_vs_u, u_star)});
  return report;
}

}  // namespace disperse
