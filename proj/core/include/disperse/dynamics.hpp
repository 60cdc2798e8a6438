#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "disperse/field.hpp"
#include "disperse/operator.hpp"
#include "disperse/tridiagonal.hpp"

namespace disperse {

/// One competitor: dispersal strategy (P or Q), rate multiplier d and growth
/// multiplier r_mult.
struct SpeciesParams {
  SpatialField strategy;
  double d = 1.0;
  double r_mult = 1.0;

  void validate(std::string_view name) const;
};

struct StepperConfig {
  double dt = 1e-3;
  double t_end = 5000.0;
  /// Steady when ||u_{n+1} - u_n||_inf / dt < tol_steady * max(||u||, ||v||, 1)
  /// for `steady_window` consecutive steps.
  double tol_steady = 1e-9;
  std::size_t record_every = 1000;
  std::size_t steady_window = 10;

  void validate() const;
  std::size_t max_steps() const;
};

/// Full problem instance for the two-species system
///
///   u_t = div[d1 a grad(u/P)] + r1 r u (1 - (u+v)/K)
///   v_t = div[d2 a grad(v/Q)] + r2 r v (1 - (u+v)/K)
///
/// with zero flux of u/P and v/Q at both ends.
struct Scenario {
  SpatialField K;
  SpatialField r;
  SpatialField a;
  SpeciesParams u;
  SpeciesParams v;
  SpatialField u0;
  SpatialField v0;
  StepperConfig stepper;

  const Grid1D& grid() const noexcept { return K.grid(); }

  /// Checks positivity of coefficients, nonnegative initial data, shared grid,
  /// and the reaction bound on dt at the initial data (TimestepError).
  void validate() const;

  DispersalOperator operator_u() const;
  DispersalOperator operator_v() const;
};

struct State {
  double t = 0.0;
  SpatialField u;
  SpatialField v;
};

struct Sample {
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double sup_u = 0.0;
  double sup_v = 0.0;
  double rate_u = 0.0;
  double rate_v = 0.0;
};

struct TimeSeries {
  std::vector<Sample> samples;

  /// `t,mass_u,mass_v,sup_u,sup_v,rate_u,rate_v`
  void write_csv(std::ostream& out) const;
};

struct RunResult {
  TimeSeries series;
  State final_state;
  bool steady = false;
  std::size_t steps = 0;
};

/// Semi-implicit stepper: implicit dispersal, explicit logistic reaction,
///
///   (I - dt L_u) u^{n+1} = u^n + dt r1 r u^n (1 - (u^n + v^n)/K)
///
/// and the same for v. Both matrices are factored once at construction.
class CompetitionStepper {
 public:
  explicit CompetitionStepper(const Scenario& scenario);

  struct StepStats {
    double sup_u = 0.0;     // of the new state
    double sup_v = 0.0;
    double change_u = 0.0;  // ||u_new - u_old||_inf
    double change_v = 0.0;
  };

  /// Advances in place. Throws TimestepError if the reaction bound fails for
  /// the incoming state or the result dips below -1e-10 ||K||_inf.
  StepStats advance(std::vector<double>& u, std::vector<double>& v) const;

  State step(const State& s) const;

  /// dt * max(r1, r2) * max(r) * (1 + 2(||u|| + ||v||)/min K); must stay < 1.
  double reaction_bound(double sup_u, double sup_v) const;

  double dt() const noexcept { return dt_; }

 private:
  double dt_;
  double max_growth_;
  double min_K_;
  double negativity_floor_;
  TridiagonalLU solve_u_;
  TridiagonalLU solve_v_;
  std::vector<double> growth_u_;  // r1 * r_i
  std::vector<double> growth_v_;  // r2 * r_i
  std::vector<double> inv_K_;
  mutable std::vector<double> rhs_u_;
  mutable std::vector<double> rhs_v_;
  mutable std::vector<double> old_u_;
  mutable std::vector<double> old_v_;
};

/// Single step from `state` (assembles and factors on every call).
State step(const State& state, const Scenario& scenario);

/// Integrates from (u0, v0) to t_end or until steady.
RunResult run(const Scenario& scenario);
RunResult run_from(const Scenario& scenario, const State& initial);

struct SteadyResult {
  SpatialField profile;
  double residual = 0.0;  // ||L u + r_mult r u (1 - u/K)||_inf
  double t = 0.0;
  std::size_t steps = 0;
};

/// Solves div[d a grad(u/P)] + r_mult r u (1 - u/K) = 0 by time-marching from
/// `initial` (K when absent) until the residual is at most
/// 1e-8 * r_mult * ||r K||_inf. Throws ConvergenceError with the achieved
/// residual if t_end is reached first.
SteadyResult solve_single_steady(const SpatialField& K, const SpatialField& r,
                                 const SpatialField& a, const SpeciesParams& species,
                                 const StepperConfig& stepper,
                                 const std::optional<SpatialField>& initial = std::nullopt);

/// ||L u + r_mult r u (1 - u/K)||_inf.
double stationary_residual(const DispersalOperator& op, const SpatialField& u,
                           const SpatialField& K, const SpatialField& r, double r_mult);

/// Default initial data: u0 = 0.3 K, v0 = 0.3 K + 0.01 K cos(pi s) with s the
/// normalized coordinate in [0, 1].
SpatialField default_initial_u(const SpatialField& K);
SpatialField default_initial_v(const SpatialField& K);

/// Smooth positive field K (c0 + sum_k b_k cos(k pi s)), c0 in [0.2, 0.8],
/// sum |b_k| <= 0.15; fully determined by `seed`.
SpatialField random_initial_density(const SpatialField& K, std::uint64_t seed);

}  // namespace disperse
