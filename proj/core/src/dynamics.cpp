#include "disperse/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/core.h>

#include "disperse/csv.hpp"
#include "disperse/errors.hpp"

namespace disperse {

namespace {

double sup_of(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double mass_of(const Grid1D& g, const std::vector<double>& x) {
  return integrate(SpatialField(g, x));
}

TridiagonalLU implicit_factor(const DispersalOperator& op, double dt) {
  TridiagonalBands m = op.bands();
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.sub[i] *= -dt;
    m.super[i] *= -dt;
    m.diag[i] = 1.0 - dt * m.diag[i];
  }
  return TridiagonalLU(m);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void SpeciesParams::validate(std::string_view name) const {
  strategy.require_positive(fmt::format("strategy of species {}", name));
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw InvalidInput(fmt::format("species {}: d must be positive, got {}", name, d));
  }
  if (!(r_mult > 0.0) || !std::isfinite(r_mult)) {
    throw InvalidInput(fmt::format("species {}: r_mult must be positive, got {}", name, r_mult));
  }
}

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput(fmt::format("dt must be positive, got {}", dt));
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw InvalidInput(fmt::format("t_end must be positive, got {}", t_end));
  }
  if (dt > t_end) throw InvalidInput(fmt::format("dt={} exceeds t_end={}", dt, t_end));
  if (!(tol_steady > 0.0)) throw InvalidInput(fmt::format("tol_steady must be positive, got {}", tol_steady));
  if (record_every == 0) throw InvalidInput("record_every must be positive");
  if (steady_window == 0) throw InvalidInput("steady_window must be positive");
}

std::size_t StepperConfig::max_steps() const {
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

void Scenario::validate() const {
  const Grid1D& g = grid();
  for (const SpatialField* f : {&r, &a, &u.strategy, &v.strategy, &u0, &v0}) {
    if (!(f->grid() == g)) throw InvalidInput("scenario fields live on different grids");
  }
  K.require_positive("K");
  r.require_positive("r");
  a.require_positive("a");
  u.validate("u");
  v.validate("v");
  if (u0.min() < 0.0) throw InvalidInput("initial density u0 must be nonnegative");
  if (v0.min() < 0.0) throw InvalidInput("initial density v0 must be nonnegative");
  if (stepper.dt > 0.0) {
    const double bound = stepper.dt * std::max(u.r_mult, v.r_mult) * r.max() *
                         (1.0 + 2.0 * (u0.sup_norm() + v0.sup_norm()) / K.min());
    if (!(bound < 1.0)) {
      throw TimestepError(fmt::format(
          "time step dt={} violates the reaction bound at the initial data ({} >= 1); reduce dt",
          stepper.dt, bound));
    }
  }
  stepper.validate();
}

DispersalOperator Scenario::operator_u() const {
  return DispersalOperator::assemble(a, u.strategy, u.d);
}

DispersalOperator Scenario::operator_v() const {
  return DispersalOperator::assemble(a, v.strategy, v.d);
}

void TimeSeries::write_csv(std::ostream& out) const {
  out << "t,mass_u,mass_v,sup_u,sup_v,rate_u,rate_v\n";
  for (const Sample& s : samples) {
    out << csv::real(s.t) << ',' << csv::real(s.mass_u) << ',' << csv::real(s.mass_v) << ','
        << csv::real(s.sup_u) << ',' << csv::real(s.sup_v) << ',' << csv::real(s.rate_u) << ','
        << csv::real(s.rate_v) << '\n';
  }
}

CompetitionStepper::CompetitionStepper(const Scenario& scenario)
    : dt_(scenario.stepper.dt),
      max_growth_(std::max(scenario.u.r_mult, scenario.v.r_mult) * scenario.r.max()),
      min_K_(scenario.K.min()),
      negativity_floor_(-1e-10 * scenario.K.sup_norm()),
      solve_u_(implicit_factor(scenario.operator_u(), scenario.stepper.dt)),
      solve_v_(implicit_factor(scenario.operator_v(), scenario.stepper.dt)) {
  const std::size_t n = scenario.K.size();
  growth_u_.resize(n);
  growth_v_.resize(n);
  inv_K_.resize(n);
  rhs_u_.resize(n);
  rhs_v_.resize(n);
  old_u_.resize(n);
  old_v_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    growth_u_[i] = scenario.u.r_mult * scenario.r[i];
    growth_v_[i] = scenario.v.r_mult * scenario.r[i];
    inv_K_[i] = 1.0 / scenario.K[i];
  }
}

double CompetitionStepper::reaction_bound(double sup_u, double sup_v) const {
  return dt_ * max_growth_ * (1.0 + 2.0 * (sup_u + sup_v) / min_K_);
}

CompetitionStepper::StepStats CompetitionStepper::advance(std::vector<double>& u,
                                                          std::vector<double>& v) const {
  const std::size_t n = u.size();
  double sup_u = 0.0;
  double sup_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = u[i];
    const double vi = v[i];
    sup_u = std::max(sup_u, std::abs(ui));
    sup_v = std::max(sup_v, std::abs(vi));
    old_u_[i] = ui;
    old_v_[i] = vi;
    const double crowding = 1.0 - (ui + vi) * inv_K_[i];
    rhs_u_[i] = ui + dt_ * growth_u_[i] * ui * crowding;
    rhs_v_[i] = vi + dt_ * growth_v_[i] * vi * crowding;
  }
  const double bound = reaction_bound(sup_u, sup_v);
  if (!(bound < 1.0)) {
    throw TimestepError(fmt::format(
        "time step dt={} violates the reaction bound (dt*max(r1,r2)*max(r)*(1+2(|u|+|v|)/min K) = {} >= 1)",
        dt_, bound));
  }
  TridiagonalLU::solve_pair(solve_u_, rhs_u_, u, solve_v_, rhs_v_, v);

  StepStats stats;
  double min_u = 0.0;
  double min_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stats.sup_u = std::max(stats.sup_u, std::abs(u[i]));
    stats.sup_v = std::max(stats.sup_v, std::abs(v[i]));
    stats.change_u = std::max(stats.change_u, std::abs(u[i] - old_u_[i]));
    stats.change_v = std::max(stats.change_v, std::abs(v[i] - old_v_[i]));
    min_u = std::min(min_u, u[i]);
    min_v = std::min(min_v, v[i]);
  }
  if (min_u < negativity_floor_ || min_v < negativity_floor_ || !std::isfinite(stats.sup_u) ||
      !std::isfinite(stats.sup_v)) {
    const bool bad_u = !(min_u >= negativity_floor_) || !std::isfinite(stats.sup_u);
    const std::vector<double>& x = bad_u ? u : v;
    std::size_t cell = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(x[i] >= negativity_floor_) || !std::isfinite(x[i])) {
        cell = i;
        break;
      }
    }
    throw TimestepError(fmt::format("{} became negative ({} at cell {}): time step dt={} is too large",
                                    bad_u ? "u" : "v", x[cell], cell, dt_));
  }
  return stats;
}

State CompetitionStepper::step(const State& s) const {
  std::vector<double> u(s.u.values().begin(), s.u.values().end());
  std::vector<double> v(s.v.values().begin(), s.v.values().end());
  advance(u, v);
  return State{s.t + dt_, SpatialField(s.u.grid(), std::move(u)), SpatialField(s.v.grid(), std::move(v))};
}

State step(const State& state, const Scenario& scenario) {
  return CompetitionStepper(scenario).step(state);
}

RunResult run(const Scenario& scenario) {
  return run_from(scenario, State{0.0, scenario.u0, scenario.v0});
}

RunResult run_from(const Scenario& scenario, const State& initial) {
  scenario.validate();
  const CompetitionStepper stepper(scenario);
  const StepperConfig& cfg = scenario.stepper;
  const Grid1D& g = scenario.grid();

  std::vector<double> u(initial.u.values().begin(), initial.u.values().end());
  std::vector<double> v(initial.v.values().begin(), initial.v.values().end());
  TimeSeries series;
  bool steady = false;
  std::size_t calm_steps = 0;
  std::size_t last_recorded = 0;
  const std::size_t max_steps = cfg.max_steps();
  std::size_t n = 0;
  double rate_u = 0.0;
  double rate_v = 0.0;

  auto record = [&](std::size_t step_index) {
    series.samples.push_back(Sample{initial.t + static_cast<double>(step_index) * cfg.dt,
                                           mass_of(g, u), mass_of(g, v), sup_of(u), sup_of(v),
                                           rate_u, rate_v});
    last_recorded = step_index;
  };

  while (n < max_steps) {
    const CompetitionStepper::StepStats st = stepper.advance(u, v);
    ++n;
    rate_u = st.change_u / cfg.dt;
    rate_v = st.change_v / cfg.dt;
    const double scale = std::max({st.sup_u, st.sup_v, 1.0});
    if (rate_u < cfg.tol_steady * scale && rate_v < cfg.tol_steady * scale) {
      ++calm_steps;
    } else {
      calm_steps = 0;
    }
    if (n % cfg.record_every == 0) record(n);
    if (calm_steps >= cfg.steady_window) {
      steady = true;
      break;
    }
  }
  if (last_recorded != n) record(n);

  State final_state{initial.t + static_cast<double>(n) * cfg.dt, SpatialField(g, std::move(u)),
                    SpatialField(g, std::move(v))};
  return RunResult{std::move(series), std::move(final_state), steady, n};
}

double stationary_residual(const DispersalOperator& op, const SpatialField& u,
                           const SpatialField& K, const SpatialField& r, double r_mult) {
  const SpatialField Lu = op.apply(u);
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double res = Lu[i] + r_mult * r[i] * u[i] * (1.0 - u[i] / K[i]);
    m = std::max(m, std::abs(res));
  }
  return m;
}

SteadyResult solve_single_steady(const SpatialField& K, const SpatialField& r,
                                 const SpatialField& a, const SpeciesParams& species,
                                 const StepperConfig& stepper,
                                 const std::optional<SpatialField>& initial) {
  K.require_positive("K");
  r.require_positive("r");
  species.validate("single");
  stepper.validate();
  const DispersalOperator op = DispersalOperator::assemble(a, species.strategy, species.d);
  const TridiagonalLU factor = implicit_factor(op, stepper.dt);

  SpatialField start = initial.value_or(K);
  if (!(start.grid() == K.grid())) throw InvalidInput("initial guess lives on a different grid");
  start.require_positive("initial guess");

  const std::size_t n_cells = K.size();
  const double dt = stepper.dt;
  const double max_growth = species.r_mult * r.max();
  const double min_K = K.min();
  const double floor = -1e-10 * K.sup_norm();
  const double target = 1e-8 * species.r_mult * hadamard(r, K).sup_norm();

  std::vector<double> u(start.values().begin(), start.values().end());
  std::vector<double> prev(n_cells);
  std::vector<double> rhs(n_cells);
  std::size_t calm = 0;
  const std::size_t max_steps = stepper.max_steps();
  double residual = stationary_residual(op, start, K, r, species.r_mult);
  if (residual <= target) return SteadyResult{start, residual, 0.0, 0};

  for (std::size_t n = 1; n <= max_steps; ++n) {
    const double sup_u = sup_of(u);
    const double bound = dt * max_growth * (1.0 + 2.0 * sup_u / min_K);
    if (!(bound < 1.0)) {
      throw TimestepError(fmt::format("time step dt={} violates the reaction bound ({} >= 1)", dt, bound));
    }
    prev = u;
    for (std::size_t i = 0; i < n_cells; ++i) {
      rhs[i] = u[i] + dt * species.r_mult * r[i] * u[i] * (1.0 - u[i] / K[i]);
    }
    factor.solve(rhs, u);
    for (std::size_t i = 0; i < n_cells; ++i) {
      if (u[i] < floor) {
        throw TimestepError(fmt::format("steady solve went negative at cell {}: dt={} is too large", i, dt));
      }
    }
    const double rate = sup_diff(u, prev) / dt;
    calm = rate < stepper.tol_steady * std::max(sup_of(u), 1.0) ? calm + 1 : 0;
    if (calm >= stepper.steady_window) {
      SpatialField profile(K.grid(), u);
      residual = stationary_residual(op, profile, K, r, species.r_mult);
      if (residual <= target) {
        return SteadyResult{std::move(profile), residual, static_cast<double>(n) * dt, n};
      }
      calm = 0;
    }
  }
  residual = stationary_residual(op, SpatialField(K.grid(), u), K, r, species.r_mult);
  throw ConvergenceError(fmt::format("single-species steady state not reached by t_end={} "
                                     "(residual {}, target {})",
                                     stepper.t_end, residual, target),
                         residual);
}

SpatialField default_initial_u(const SpatialField& K) { return 0.3 * K; }

SpatialField default_initial_v(const SpatialField& K) {
  const Grid1D& g = K.grid();
  std::vector<double> v(K.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = (g.center(i) - g.x_left()) / g.length();
    v[i] = K[i] * (0.3 + 0.01 * std::cos(std::numbers::pi * s));
  }
  return SpatialField(g, std::move(v));
}

SpatialField random_initial_density(const SpatialField& K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr int kModes = 4;
  const double c0 = 0.2 + 0.6 * uniform01(rng);
  double b[kModes];
  for (double& bk : b) bk = (2.0 * uniform01(rng) - 1.0) * 0.15 / kModes;
  const Grid1D& g = K.grid();
  std::vector<double> out(K.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = (g.center(i) - g.x_left()) / g.length();
    double shape = c0;
    for (int k = 0; k < kModes; ++k) shape += b[k] * std::cos((k + 1) * std::numbers::pi * s);
    out[i] = K[i] * shape;
  }
  return SpatialField(g, std::move(out));
}

}  // namespace disperse
