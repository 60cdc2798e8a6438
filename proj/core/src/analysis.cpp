#include "disperse/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include <fmt/core.h>

#include "disperse/csv.hpp"
#include "disperse/errors.hpp"

namespace disperse {

namespace {

bool same_value(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

// lhs = int r S (crowd/K - 1), rhs = int a |grad w|^2 / w^2 with w = density/S.
IdentityReport gradient_identity(const SpatialField& density, const SpatialField& crowd,
                                 const SpatialField& K, const SpatialField& strategy,
                                 const SpatialField& r, const SpatialField& a, double rel_tol,
                                 double abs_floor, std::string name) {
  density.require_positive("steady density");
  const std::size_t n = density.size();
  const double h = density.grid().h();

  std::vector<double> lhs_terms(n);
  for (std::size_t i = 0; i < n; ++i) lhs_terms[i] = r[i] * strategy[i] * (crowd[i] / K[i] - 1.0);
  const double lhs = integrate(SpatialField(density.grid(), std::move(lhs_terms)));

  const SpatialField w = divide(density, strategy);
  double rhs = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a_face = 0.5 * (a[i] + a[i + 1]);
    const double g = (w[i + 1] - w[i]) / h;
    const double w2_face = 0.5 * (w[i] * w[i] + w[i + 1] * w[i + 1]);
    rhs += a_face * g * g * h / w2_face;
  }

  const double scale = integrate(hadamard(r, strategy));
  IdentityReport rep{std::move(name), lhs, rhs, relative_error(lhs, rhs), false};
  const bool agree = rep.relative_error < rel_tol || std::abs(lhs - rhs) <= abs_floor * scale;
  rep.satisfied = agree && lhs >= -abs_floor * scale;
  return rep;
}

}  // namespace

double relative_error(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

void write_report_header(std::ostream& out) { out << "check_name,lhs,rhs,rel_err,satisfied\n"; }

void write_report_row(std::ostream& out, const IdentityReport& r) {
  out << r.name << ',' << csv::real(r.lhs) << ',' << csv::real(r.rhs) << ','
      << csv::real(r.relative_error) << ',' << (r.satisfied ? "true" : "false") << '\n';
}

IdentityReport check_gradient_identity(const SpatialField& u_star, const SpatialField& K,
                                       const SpatialField& strategy, const SpatialField& r,
                                       const SpatialField& a, double rel_tol, std::string name) {
  return gradient_identity(u_star, u_star, K, strategy, r, a, rel_tol, 1e-10, std::move(name));
}

IdentityReport check_capacity_deficit(const SpatialField& u_star, const SpatialField& K,
                                      const SpatialField& r, std::string name) {
  const double lhs = integrate(hadamard(r, K));
  const double rhs = integrate(hadamard(r, u_star));
  return IdentityReport{std::move(name), lhs, rhs, relative_error(lhs, rhs),
                        lhs - rhs > 1e-10 * lhs};
}

std::vector<IdentityReport> check_coexistence_identities(const SpatialField& u_s,
                                                         const SpatialField& v_s,
                                                         const Scenario& scenario) {
  const SpatialField& K = scenario.K;
  const SpatialField& r = scenario.r;
  const double r1 = scenario.u.r_mult;
  const double r2 = scenario.v.r_mult;
  const SpatialField total = u_s + v_s;
  const std::size_t n = K.size();
  const double rK = integrate(hadamard(r, K));

  std::vector<IdentityReport> out;

  std::vector<double> balance(n);
  std::vector<double> surplus(n);
  std::vector<double> surplus_sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double deficit = 1.0 - total[i] / K[i];
    balance[i] = r[i] * (r1 * u_s[i] + r2 * v_s[i]) * deficit;
    surplus[i] = r[i] * K[i] * deficit;
    surplus_sq[i] = r[i] * K[i] * deficit * deficit;
  }
  const double balance_value = integrate(SpatialField(K.grid(), std::move(balance)));
  out.push_back(IdentityReport{"growth_balance", balance_value, 0.0, relative_error(balance_value, 0.0),
                               std::abs(balance_value) < 1e-8 * rK});

  if (same_value(r1, r2, 1e-12)) {
    const double lhs = integrate(SpatialField(K.grid(), std::move(surplus)));
    const double rhs = integrate(SpatialField(K.grid(), std::move(surplus_sq)));
    const bool equal = std::abs(lhs - rhs) < 1e-8 * rK;
    out.push_back(IdentityReport{"capacity_surplus", lhs, rhs, relative_error(lhs, rhs),
                                 equal && lhs >= -1e-8 * rK});
  }

  const SpatialField a_u = scenario.u.d * scenario.a;
  const SpatialField a_v = scenario.v.d * scenario.a;
  // A coexistence state comes out of a time-marched run, so it carries the same
  // 1e-8 absolute accuracy as growth_balance rather than the single-species 1e-10.
  out.push_back(gradient_identity(u_s, total, K, scenario.u.strategy, r1 * r, a_u, 0.01, 1e-8,
                                  "gradient_identity_u"));
  out.push_back(gradient_identity(v_s, total, K, scenario.v.strategy, r2 * r, a_v, 0.01, 1e-8,
                                  "gradient_identity_v"));
  return out;
}

ThresholdReport invasion_thresholds(const Scenario& scenario, const SpatialField& v_star) {
  const SpatialField& K = scenario.K;
  ThresholdReport t;
  t.M = integrate(hadamard(scenario.r, K - v_star));
  if (!(t.M > 0.0)) {
    throw InvalidInput(fmt::format("threshold mass M = {} is not positive (K and Q dependent?)", t.M));
  }
  const SpatialField root = divide(K, scenario.u.strategy).map([](double v) { return std::sqrt(v); });
  t.gradient = gradient_sq_weighted(root, scenario.a);
  if (!(t.gradient > 0.0)) {
    throw InvalidInput("gradient of sqrt(K/P) vanishes: K is proportional to P");
  }
  t.d_star = scenario.u.r_mult * t.M / t.gradient;
  t.r_star = scenario.u.d * t.gradient / t.M;
  return t;
}

Outcome Outcome::coexistence(double alpha, double beta, std::string note) {
  return Outcome{OutcomeKind::Coexistence, alpha, beta, std::move(note)};
}

Outcome Outcome::of(OutcomeKind kind, std::string note) {
  return Outcome{kind, 0.0, 0.0, std::move(note)};
}

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Coexistence: return "coexistence";
    case OutcomeKind::UWins: return "u_wins";
    case OutcomeKind::VWins: return "v_wins";
    case OutcomeKind::Extinction: return "extinction";
    case OutcomeKind::Undetermined: return "undetermined";
  }
  return "undetermined";
}

OutcomeKind parse_outcome_kind(const std::string& text) {
  for (OutcomeKind k : {OutcomeKind::Coexistence, OutcomeKind::UWins, OutcomeKind::VWins,
                        OutcomeKind::Extinction, OutcomeKind::Undetermined}) {
    if (to_string(k) == text) return k;
  }
  throw InvalidInput(fmt::format("unknown outcome '{}' (expected coexistence, u_wins, v_wins, "
                                 "extinction or undetermined)",
                                 text));
}

Outcome predict_outcome(const Scenario& scenario, const PredictionTolerances& tol) {
  const SpatialField& K = scenario.K;
  const SpatialField& P = scenario.u.strategy;
  const SpatialField& Q = scenario.v.strategy;
  const double d1 = scenario.u.d;
  const double d2 = scenario.v.d;
  const double r1 = scenario.u.r_mult;
  const double r2 = scenario.v.r_mult;
  const bool equal_r = same_value(r1, r2, tol.same_parameter);
  const bool equal_d = same_value(d1, d2, tol.same_parameter);

  const bool pq_independent = linearly_independent(P, Q, tol.independence);
  const bool pk_independent = linearly_independent(P, K, tol.independence);
  const bool qk_independent = linearly_independent(Q, K, tol.independence);

  if (pq_independent) {
    const auto hull = positive_hull_coefficients(K, P, Q, tol.hull);
    if (hull) {
      if (equal_r) return Outcome::coexistence(hull->alpha, hull->beta, "K = alpha P + beta Q");
      return Outcome::of(OutcomeKind::Undetermined,
                         "K in the positive hull of P and Q but r1 != r2");
    }
  }

  if (!pk_independent && qk_independent) {
    if (equal_r) return Outcome::of(OutcomeKind::UWins, "P proportional to K, Q independent of K");
    return Outcome::of(OutcomeKind::Undetermined, "P proportional to K but r1 != r2");
  }
  if (!qk_independent && pk_independent) {
    if (equal_r) return Outcome::of(OutcomeKind::VWins, "Q proportional to K, P independent of K");
    return Outcome::of(OutcomeKind::Undetermined, "Q proportional to K but r1 != r2");
  }

  const bool same_strategy = relative_sup_distance(P, Q) <= tol.same_profile;
  if (same_strategy && pk_independent) {
    if (equal_r && !equal_d) {
      return Outcome::of(d1 < d2 ? OutcomeKind::UWins : OutcomeKind::VWins,
                         "P == Q not proportional to K, equal growth, slower disperser wins");
    }
    if (equal_d && !equal_r) {
      return Outcome::of(r1 > r2 ? OutcomeKind::UWins : OutcomeKind::VWins,
                         "P == Q not proportional to K, equal dispersal, faster grower wins");
    }
    return Outcome::of(OutcomeKind::Undetermined,
                       "P == Q not proportional to K: needs exactly one of d or r to differ");
  }
  return Outcome::of(OutcomeKind::Undetermined, "no theorem hypothesis applies");
}

Outcome classify_outcome(const RunResult& run, const Scenario& scenario,
                         const ClassificationThresholds& th) {
  const double k_sup = scenario.K.sup_norm();
  const SpatialField& u = run.final_state.u;
  const SpatialField& v = run.final_state.v;
  const auto& samples = run.series.samples;

  const std::size_t tail = std::max<std::size_t>(2, (samples.size() + 9) / 10);
  const std::size_t first = samples.size() > tail ? samples.size() - tail : 0;
  auto mass_non_increasing = [&](auto mass) {
    for (std::size_t i = first + 1; i < samples.size(); ++i) {
      if (mass(samples[i]) > mass(samples[i - 1])) return false;
    }
    return true;
  };
  const bool u_extinct = u.sup_norm() < th.extinct * k_sup &&
                         mass_non_increasing([](const Sample& s) { return s.mass_u; });
  const bool v_extinct = v.sup_norm() < th.extinct * k_sup &&
                         mass_non_increasing([](const Sample& s) { return s.mass_v; });
  const bool u_alive = u.sup_norm() > th.survive * k_sup;
  const bool v_alive = v.sup_norm() > th.survive * k_sup;

  if (u_extinct && v_extinct) return Outcome::of(OutcomeKind::Extinction);
  if (v_extinct && u_alive) return Outcome::of(OutcomeKind::UWins);
  if (u_extinct && v_alive) return Outcome::of(OutcomeKind::VWins);
  if (u_alive && v_alive && run.steady) {
    const SpatialField& P = scenario.u.strategy;
    const SpatialField& Q = scenario.v.strategy;
    std::optional<HullCoefficients> fit;
    try {
      fit = positive_hull_coefficients(u + v, P, Q, th.fit);
    } catch (const InvalidInput&) {
      // P and Q (nearly) dependent: fall through to per-species projection.
    }
    if (fit) return Outcome::coexistence(fit->alpha, fit->beta, "u + v in the positive hull of P, Q");
    return Outcome::coexistence(inner(u, P) / inner(P, P), inner(v, Q) / inner(Q, Q),
                                "projection fit; u + v not in the positive hull of P, Q");
  }
  return Outcome::of(OutcomeKind::Undetermined,
                     run.steady ? "steady but neither extinct nor clearly coexisting"
                                : "not steady and no species extinct by t_end");
}

bool noncorrespondence_holds(const SpatialField& K, const SpatialField& strategy,
                             const SpatialField& a, double tol) {
  const DispersalOperator op = DispersalOperator::assemble(a, strategy, 1.0);
  return op.apply(K).sup_norm() > tol * op.norm_inf() * K.sup_norm();
}

std::vector<IdentityReport> operator_structure_checks(const SpatialField& strategy,
                                                      const ApplyFn& apply, double norm_inf,
                                                      const SpatialField& probe,
                                                      const std::string& prefix) {
  std::vector<IdentityReport> out;
  const double kernel = apply(strategy).sup_norm();
  const double kernel_bound = 1e-13 * strategy.sup_norm();
  out.push_back(IdentityReport{prefix + "_kernel", kernel, kernel_bound,
                               relative_error(kernel, kernel_bound), kernel <= kernel_bound});
  const double mass = std::abs(integrate(apply(probe)));
  const double mass_bound = 1e-13 * probe.sup_norm() * norm_inf;
  out.push_back(IdentityReport{prefix + "_conservation", mass, mass_bound,
                               relative_error(mass, mass_bound), mass <= mass_bound});
  return out;
}

}  // namespace disperse
