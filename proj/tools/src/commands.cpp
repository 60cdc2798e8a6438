#include "disperse/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "disperse/csv.hpp"
#include "disperse/spectra.hpp"

namespace disperse::cli {

namespace {

using csv::real;

constexpr const char* kPass = "pass";
constexpr const char* kFail = "fail";
constexpr const char* kSkip = "skip";
constexpr const char* kInfo = "info";

std::string hypothesis_not_met(const std::string& why) { return "hypothesis not met: " + why; }

CheckLine judged(std::string name, bool ok, std::string detail) {
  return CheckLine{std::move(name), ok ? kPass : kFail, std::move(detail)};
}

CheckLine from_report(const IdentityReport& r) {
  return judged(r.name, r.satisfied,
                fmt::format("lhs={} rhs={} rel_err={}", real(r.lhs), real(r.rhs), real(r.relative_error)));
}

std::string outcome_detail(const Outcome& o) {
  std::string d = to_string(o.kind);
  if (o.kind == OutcomeKind::Coexistence) d += fmt::format(" alpha={} beta={}", real(o.alpha), real(o.beta));
  if (!o.note.empty()) d += " (" + o.note + ")";
  return d;
}

double sigma_of(const Scenario& s, const SpeciesParams& invader, const SpatialField& resident) {
  return principal_eigen(invasion_problem(s, invader, resident)).sigma1;
}

// Files written by a command, relative to the output directory.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    std::filesystem::create_directories(dir_);
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw InputError("", fmt::format("cannot write '{}'", (dir_ / name).string()));
    names_.push_back(name);
    return out;
  }

  const std::vector<std::string>& names() const { return names_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

void write_profiles(std::ostream& out, const SpatialField& u, const SpatialField* v,
                    const std::string& u_name, const std::string& v_name) {
  out << "x," << u_name;
  if (v) out << ',' << v_name;
  out << '\n';
  const Grid1D& g = u.grid();
  for (std::size_t i = 0; i < u.size(); ++i) {
    out << real(g.center(i)) << ',' << real(u[i]);
    if (v) out << ',' << real((*v)[i]);
    out << '\n';
  }
}

void write_extras(const ScenarioSpec& spec, OutputSet& files) {
  auto listed = [&](const char* name) {
    return std::find(spec.outputs.begin(), spec.outputs.end(), name) != spec.outputs.end();
  };
  const Scenario& s = spec.scenario;
  if (listed("operator")) {
    auto out = files.open("operator_u.csv");
    s.operator_u().write_triplets_csv(out);
    if (spec.has_v) {
      auto out_v = files.open("operator_v.csv");
      s.operator_v().write_triplets_csv(out_v);
    }
  }
  if (listed("coefficients")) {
    auto out = files.open("coefficients.csv");
    out << "x,K,P,Q,r,a\n";
    for (std::size_t i = 0; i < s.K.size(); ++i) {
      out << real(s.grid().center(i)) << ',' << real(s.K[i]) << ',' << real(s.u.strategy[i]) << ','
          << real(s.v.strategy[i]) << ',' << real(s.r[i]) << ',' << real(s.a[i]) << '\n';
    }
  }
}

struct Steady {
  std::optional<SteadyResult> u;
  std::optional<SteadyResult> v;
  std::string u_error;
  std::string v_error;
};

Steady steady_states(const ScenarioSpec& spec) {
  const Scenario& s = spec.scenario;
  Steady out;
  try {
    out.u = solve_single_steady(s.K, s.r, s.a, s.u, s.stepper);
  } catch (const Error& e) {
    out.u_error = e.what();
  }
  if (spec.has_v) {
    try {
      out.v = solve_single_steady(s.K, s.r, s.a, s.v, s.stepper);
    } catch (const Error& e) {
      out.v_error = e.what();
    }
  }
  return out;
}

void single_species_checks(const std::string& tag, const SpatialField& K, const SpatialField& strategy,
                           const SpeciesParams& species, const Scenario& s, const SteadyResult& steady,
                           VerifyResult& result) {
  const SpatialField& star = steady.profile;
  const bool independent = linearly_independent(strategy, K);
  const bool noncorrespondence = noncorrespondence_holds(K, strategy, s.a);
  const std::string strat = tag == "u" ? "P" : "Q";

  result.checks.push_back({"noncorrespondence_" + tag, kInfo,
                           fmt::format("div_a_grad_K_over_{}_nonzero={} {}_K_independent={}", strat,
                                       noncorrespondence ? 1 : 0, strat, independent ? 1 : 0)});

  if (!independent) {
    const double dist = relative_sup_distance(star, K);
    result.checks.push_back(judged("ideal_free_" + tag, dist < 1e-6,
                                   fmt::format("rel_sup_distance_to_K={}", real(dist))));
  } else {
    result.checks.push_back({"ideal_free_" + tag, kSkip,
                             hypothesis_not_met(strat + " not proportional to K")});
  }

  const SpatialField r_eff = species.r_mult * s.r;
  const SpatialField a_eff = species.d * s.a;
  const IdentityReport identity =
      check_gradient_identity(star, K, strategy, r_eff, a_eff, 0.01, "gradient_identity_" + tag);
  result.identities.push_back(identity);
  result.checks.push_back(from_report(identity));

  if (independent) {
    result.checks.push_back(judged("gradient_sign_" + tag, identity.lhs > 0.0 && identity.rhs > 0.0,
                                   fmt::format("lhs={} rhs={}", real(identity.lhs), real(identity.rhs))));
  } else {
    result.checks.push_back({"gradient_sign_" + tag, kSkip, hypothesis_not_met(strat + " proportional to K")});
  }

  if (noncorrespondence) {
    const IdentityReport deficit = check_capacity_deficit(star, K, s.r, "capacity_deficit_" + tag);
    result.identities.push_back(deficit);
    result.checks.push_back(from_report(deficit));
  } else {
    result.checks.push_back({"capacity_deficit_" + tag, kSkip,
                             hypothesis_not_met("div[a grad(K/" + strat + ")] vanishes")});
  }
}

void competition_checks(const ScenarioSpec& spec, const SpatialField& u_star, const SpatialField& v_star,
                        VerifyResult& result) {
  const Scenario& s = spec.scenario;
  const SpatialField& K = s.K;
  const SpatialField& P = s.u.strategy;
  const SpatialField& Q = s.v.strategy;
  const double d1 = s.u.d, d2 = s.v.d, r1 = s.u.r_mult, r2 = s.v.r_mult;
  const bool equal_r = r1 == r2;
  const bool equal_d = d1 == d2;

  const InstabilityReport cert = instability_certificates(s, u_star, v_star);
  result.checks.push_back(judged("zero_repeller", cert.sigma_u_at_zero > 0.0 && cert.sigma_v_at_zero > 0.0,
                                 fmt::format("sigma_u={} sigma_v={}", real(cert.sigma_u_at_zero),
                                             real(cert.sigma_v_at_zero))));

  const bool pq_independent = linearly_independent(P, Q);
  const bool pk_independent = linearly_independent(P, K);
  const bool qk_independent = linearly_independent(Q, K);
  std::optional<HullCoefficients> hull;
  if (pq_independent) hull = positive_hull_coefficients(K, P, Q);

  if (hull) {
    result.checks.push_back(judged("semi_trivial_u_star_unstable", cert.sigma_v_at_u_star > 0.0,
                                   fmt::format("sigma1={}", real(cert.sigma_v_at_u_star))));
    result.checks.push_back(judged("semi_trivial_v_star_unstable", cert.sigma_u_at_v_star > 0.0,
                                   fmt::format("sigma1={}", real(cert.sigma_u_at_v_star))));
    for (const char* name : {"sqrt_beta_Q", "sqrt_alpha_P"}) {
      const Witness* w = cert.find(name);
      result.checks.push_back(judged(std::string("witness_") + name, w && w->quotient > 0.0,
                                     fmt::format("invader={} quotient={}", w ? w->invader : "?",
                                                 real(w ? w->quotient : 0.0))));
    }
  } else {
    const std::string why = hypothesis_not_met("K not in the positive hull of independent P and Q");
    for (const char* name : {"semi_trivial_u_star_unstable", "semi_trivial_v_star_unstable",
                             "witness_sqrt_beta_Q", "witness_sqrt_alpha_P"}) {
      result.checks.push_back({name, kSkip, why});
    }
  }

  // Ideal free strategy against a mismatched one.
  const double neutral = 1e-10 * s.r.max() * std::max(r1, r2);
  if (!pk_independent && qk_independent) {
    result.checks.push_back(judged("ideal_free_u_invades", cert.sigma_u_at_v_star > 0.0,
                                   fmt::format("sigma1_at_(0,v*)={}", real(cert.sigma_u_at_v_star))));
    result.checks.push_back(judged("ideal_free_u_resists", cert.sigma_v_at_u_star <= neutral,
                                   fmt::format("sigma1_at_(u*,0)={}", real(cert.sigma_v_at_u_star))));
  } else if (!qk_independent && pk_independent) {
    result.checks.push_back(judged("ideal_free_v_invades", cert.sigma_v_at_u_star > 0.0,
                                   fmt::format("sigma1_at_(u*,0)={}", real(cert.sigma_v_at_u_star))));
    result.checks.push_back(judged("ideal_free_v_resists", cert.sigma_u_at_v_star <= neutral,
                                   fmt::format("sigma1_at_(0,v*)={}", real(cert.sigma_u_at_v_star))));
  } else {
    result.checks.push_back({"ideal_free_invasion", kSkip,
                             hypothesis_not_met("exactly one strategy proportional to K")});
  }

  // Shared strategy, different rates.
  const bool same_strategy = relative_sup_distance(P, Q) <= 1e-12;
  if (same_strategy && pk_independent && (equal_r != equal_d)) {
    const bool u_favoured = equal_r ? d1 < d2 : r1 > r2;
    const double sigma = u_favoured ? cert.sigma_u_at_v_star : cert.sigma_v_at_u_star;
    const std::string name = equal_r ? "slower_disperser_invades" : "faster_grower_invades";
    result.checks.push_back(judged(name, sigma > 0.0,
                                   fmt::format("invader={} sigma1={}", u_favoured ? "u" : "v", real(sigma))));
    if (equal_r) {
      // The resident itself is a trial function; its quotient is known in closed form.
      const SpatialField& resident = u_favoured ? v_star : u_star;
      const Witness* w = cert.find(u_favoured ? "v_star" : "u_star");
      const double expected = std::abs(d2 - d1) * gradient_sq_weighted(divide(resident, P), s.a) /
                              integrate(divide(hadamard(resident, resident), P));
      const double rel = relative_error(w->quotient, expected);
      IdentityReport rep{"witness_resident", w->quotient, expected, rel, rel < 1e-4 && w->quotient > 0.0};
      result.identities.push_back(rep);
      result.checks.push_back(from_report(rep));
    }
    const bool coexist = result.observed && result.observed->kind == OutcomeKind::Coexistence;
    if (result.observed && noncorrespondence_holds(K, P, s.a)) {
      result.checks.push_back(judged("no_interior_coexistence", !coexist,
                                     "observed=" + to_string(result.observed->kind)));
    }
  } else {
    result.checks.push_back({"shared_strategy_invasion", kSkip,
                             hypothesis_not_met("P == Q not proportional to K with exactly one of d, r differing")});
  }

  // Small diffusion / large growth thresholds for the invader u.
  if (pk_independent && qk_independent) {
    try {
      const ThresholdReport th = invasion_thresholds(s, v_star);
      const double product = th.d_star * th.r_star;
      const double rel = relative_error(product, d1 * r1);
      IdentityReport rep{"threshold_product", product, d1 * r1, rel, rel <= 4.0 * std::numeric_limits<double>::epsilon()};
      result.identities.push_back(rep);
      result.checks.push_back(from_report(rep));

      const double sigma_small = sigma_of(s, SpeciesParams{P, 0.5 * th.d_star, r1}, v_star);
      result.checks.push_back(judged("small_diffusion_invasion", sigma_small > 0.0,
                                     fmt::format("d_star={} d1=0.5*d_star sigma1_at_(0,v*)={}",
                                                 real(th.d_star), real(sigma_small))));
      const double sigma_large = sigma_of(s, SpeciesParams{P, d1, 2.0 * th.r_star}, v_star);
      result.checks.push_back(judged("large_growth_invasion", sigma_large > 0.0,
                                     fmt::format("r_star={} r1=2*r_star sigma1_at_(0,v*)={}",
                                                 real(th.r_star), real(sigma_large))));
    } catch (const InvalidInput& e) {
      result.checks.push_back(judged("threshold_product", false, e.what()));
    }
  } else {
    result.checks.push_back({"invasion_thresholds", kSkip,
                             hypothesis_not_met("K independent of both P and Q")});
  }
}

void dynamics_checks(const ScenarioSpec& spec, const std::optional<RunResult>& run, const Steady& steady,
                     VerifyResult& result) {
  const Scenario& s = spec.scenario;
  const Outcome& predicted = result.predicted;
  result.checks.push_back({"outcome_prediction", kInfo, outcome_detail(predicted)});
  if (!run) return;

  const Outcome& observed = *result.observed;
  result.checks.push_back({"outcome_observed", kInfo,
                           outcome_detail(observed) + fmt::format(" steady={} t={}", run->steady ? 1 : 0,
                                                                  real(run->final_state.t))});
  if (predicted.kind == OutcomeKind::Undetermined) {
    result.checks.push_back({"outcome_agreement", kSkip, hypothesis_not_met("outside every theorem")});
  } else {
    result.checks.push_back(judged("outcome_agreement", predicted.kind == observed.kind,
                                   "predicted=" + to_string(predicted.kind) +
                                       " observed=" + to_string(observed.kind)));
  }

  const SpatialField& u = run->final_state.u;
  const SpatialField& v = run->final_state.v;
  if (predicted.kind == OutcomeKind::Coexistence) {
    const double du = relative_sup_distance(u, predicted.alpha * s.u.strategy);
    const double dv = relative_sup_distance(v, predicted.beta * s.v.strategy);
    result.checks.push_back(judged("coexistence_convergence", du < 1e-3 && dv < 1e-3,
                                   fmt::format("dist_u={} dist_v={}", real(du), real(dv))));
  } else {
    result.checks.push_back({"coexistence_convergence", kSkip,
                             hypothesis_not_met("K not in the positive hull of P and Q")});
  }

  const bool u_wins = predicted.kind == OutcomeKind::UWins;
  if ((u_wins || predicted.kind == OutcomeKind::VWins) && steady.u && steady.v) {
    // Distance to the winner's semi-trivial state; meaningful even when the
    // loser decays too slowly to be declared extinct by t_end.
    const SpatialField& winner = u_wins ? u : v;
    const SpatialField& loser = u_wins ? v : u;
    const SpatialField& target = u_wins ? steady.u->profile : steady.v->profile;
    const double dist = relative_sup_distance(winner, target);
    const double rest = loser.sup_norm() / s.K.sup_norm();
    result.checks.push_back(judged("exclusion_convergence", dist < 1e-3 && rest < 1e-3,
                                   fmt::format("winner_rel_dist={} loser_sup_rel={}", real(dist), real(rest))));
  } else {
    result.checks.push_back({"exclusion_convergence", kSkip, hypothesis_not_met("no exclusion predicted")});
  }

  if (observed.kind == OutcomeKind::Coexistence) {
    for (const IdentityReport& r : check_coexistence_identities(u, v, s)) {
      result.identities.push_back(r);
      result.checks.push_back(from_report(r));
    }
  } else {
    result.checks.push_back({"coexistence_identities", kSkip, hypothesis_not_met("no coexistence state observed")});
  }
}

}  // namespace

void write_check_lines(std::ostream& out, const std::vector<CheckLine>& lines, bool header) {
  if (header) out << "name,status,detail\n";
  for (const CheckLine& c : lines) out << c.name << ',' << c.status << ',' << c.detail << '\n';
}

std::size_t VerifyResult::count(const std::string& status) const {
  std::size_t n = 0;
  for (const CheckLine& c : checks) n += c.status == status ? 1 : 0;
  return n;
}

VerifyResult verify_scenario(const ScenarioSpec& spec, const VerifyHooks& hooks) {
  const Scenario& s = spec.scenario;
  VerifyResult result;

  const SpatialField probe = random_initial_density(s.K, spec.seed);
  auto structure = [&](const DispersalOperator& op, const std::string& prefix) {
    ApplyFn apply = hooks.operator_apply ? hooks.operator_apply(op)
                                         : ApplyFn([&op](const SpatialField& f) { return op.apply(f); });
    for (const IdentityReport& r : operator_structure_checks(op.strategy(), apply, op.norm_inf(), probe, prefix)) {
      result.identities.push_back(r);
      result.checks.push_back(from_report(r));
    }
  };
  const DispersalOperator op_u = s.operator_u();
  structure(op_u, "operator_u");
  std::optional<DispersalOperator> op_v;
  if (spec.has_v) {
    op_v = s.operator_v();
    structure(*op_v, "operator_v");
  }

  const Steady steady = steady_states(spec);
  auto steady_line = [&](const std::string& tag, const std::optional<SteadyResult>& st, const std::string& err) {
    if (st) {
      result.checks.push_back({"steady_" + tag, kPass,
                               fmt::format("residual={} t={}", real(st->residual), real(st->t))});
    } else {
      result.checks.push_back({"steady_" + tag, kFail, err});
    }
  };
  steady_line("u", steady.u, steady.u_error);
  if (spec.has_v) steady_line("v", steady.v, steady.v_error);

  if (steady.u) single_species_checks("u", s.K, s.u.strategy, s.u, s, *steady.u, result);
  if (spec.has_v && steady.v) single_species_checks("v", s.K, s.v.strategy, s.v, s, *steady.v, result);

  std::optional<RunResult> run;
  try {
    run = disperse::run(s);
  } catch (const Error& e) {
    result.checks.push_back({"run", kFail, e.what()});
  }
  result.predicted = spec.has_v ? predict_outcome(s)
                                : Outcome::of(OutcomeKind::Undetermined, "single species");
  if (run) result.observed = classify_outcome(*run, s);

  if (!spec.has_v) {
    result.checks.push_back({"competition", kSkip, hypothesis_not_met("species v absent")});
    if (run && steady.u) {
      const double dist = relative_sup_distance(run->final_state.u, steady.u->profile);
      result.checks.push_back(judged("run_converges_to_u_star", run->steady && dist < 1e-6,
                                     fmt::format("steady={} rel_sup_distance={}", run->steady ? 1 : 0,
                                                 real(dist))));
    }
    return result;
  }

  if (steady.u && steady.v) {
    competition_checks(spec, steady.u->profile, steady.v->profile, result);
  } else {
    result.checks.push_back({"competition", kSkip, hypothesis_not_met("semi-trivial steady states unavailable")});
  }
  dynamics_checks(spec, run, steady, result);
  return result;
}

Scenario with_parameter(const Scenario& scenario, const std::string& axis, double value) {
  Scenario s = scenario;
  if (axis == "d1") {
    s.u.d = value;
  } else if (axis == "d2") {
    s.v.d = value;
  } else if (axis == "r1") {
    s.u.r_mult = value;
  } else if (axis == "r2") {
    s.v.r_mult = value;
  } else {
    throw InputError("sweep.axis", fmt::format("unknown axis '{}'", axis));
  }
  return s;
}

std::vector<SweepRow> sweep_scenario(const ScenarioSpec& spec, const SweepSpec& sweep) {
  sweep.validate();
  if (!spec.has_v) throw InputError("species_v", "a sweep needs both species");
  const std::vector<double> values = sweep.values();

  auto evaluate = [&spec, &sweep](double value) {
    SweepRow row;
    row.value = value;
    try {
      const Scenario s = with_parameter(spec.scenario, sweep.axis, value);
      s.validate();
      const SteadyResult u_star = solve_single_steady(s.K, s.r, s.a, s.u, s.stepper);
      const SteadyResult v_star = solve_single_steady(s.K, s.r, s.a, s.v, s.stepper);
      row.sigma_u_at_v_star = sigma_of(s, s.u, v_star.profile);
      row.sigma_v_at_u_star = sigma_of(s, s.v, u_star.profile);
      row.outcome = to_string(classify_outcome(run(s), s).kind);
    } catch (const Error& e) {
      row.outcome = "error";
      row.sigma_u_at_v_star = row.sigma_v_at_u_star = std::numeric_limits<double>::quiet_NaN();
      row.error = e.what();
    }
    return row;
  };

  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (std::size_t begin = 0; begin < values.size(); begin += workers) {
    const std::size_t end = std::min(values.size(), begin + workers);
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, evaluate, values[i]));
    }
    for (auto& f : batch) rows.push_back(f.get());
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::string& axis, const std::vector<SweepRow>& rows) {
  out << "param,value,outcome,sigma1_at_(0,v*),sigma1_at_(u*,0)\n";
  auto num = [](double x) { return std::isnan(x) ? std::string("nan") : real(x); };
  for (const SweepRow& r : rows) {
    out << axis << ',' << real(r.value) << ',' << r.outcome << ',' << num(r.sigma_u_at_v_star) << ','
        << num(r.sigma_v_at_u_star) << '\n';
  }
}

namespace {

SweepSpec resolve_sweep(const ScenarioSpec& spec, const SweepOverrides& o) {
  SweepSpec sw = spec.sweep.value_or(SweepSpec{});
  if (o.axis) sw.axis = *o.axis;
  if (o.from) sw.from = *o.from;
  if (o.to) sw.to = *o.to;
  if (o.count) sw.count = *o.count;
  if (o.spacing) {
    if (*o.spacing != "linear" && *o.spacing != "log") {
      throw InputError("sweep.spacing", fmt::format("expected 'linear' or 'log', got '{}'", *o.spacing));
    }
    sw.log_spacing = *o.spacing == "log";
  }
  if (sw.axis.empty()) throw InputError("sweep.axis", "no sweep axis given ([sweep] section or --axis)");
  sw.validate();
  return sw;
}

struct Summary {
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t skip = 0;
  std::string outcome;
};

int simulate(const ScenarioSpec& spec, const CommandOptions& opt, OutputSet& files, std::ostream& report,
             Summary& summary) {
  const Scenario& s = spec.scenario;
  const RunResult result = run(s);
  if (spec.wants("timeseries")) {
    auto out = files.open("timeseries.csv");
    result.series.write_csv(out);
  }
  if (spec.wants("profiles")) {
    auto out = files.open("profiles.csv");
    write_profiles(out, result.final_state.u, &result.final_state.v, "u", "v");
  }
  const Outcome observed = classify_outcome(result, s);
  const Outcome predicted = spec.has_v ? predict_outcome(s) : Outcome::of(OutcomeKind::Undetermined, "single species");
  std::vector<CheckLine> lines{
      {"run", result.steady ? "steady" : "t_end",
       fmt::format("t={} steps={}", real(result.final_state.t), result.steps)},
      {"predicted", to_string(predicted.kind), predicted.note},
      {"outcome", to_string(observed.kind), outcome_detail(observed)},
  };
  summary.outcome = to_string(observed.kind);
  int code = kExitOk;
  if (opt.expect) {
    const bool met = parse_outcome_kind(*opt.expect) == observed.kind;
    lines.push_back(judged("expect", met, "expected=" + *opt.expect + " observed=" + to_string(observed.kind)));
    (met ? summary.pass : summary.fail) += 1;
    if (!met) code = kExitUnmet;
  }
  write_check_lines(report, lines, false);
  return code;
}

int steady(const ScenarioSpec& spec, OutputSet& files, std::ostream& report, Summary& summary) {
  const Steady st = steady_states(spec);
  std::vector<CheckLine> lines;
  auto line = [&](const std::string& tag, const std::optional<SteadyResult>& r, const std::string& err) {
    if (r) {
      lines.push_back({"steady_" + tag, kPass,
                       fmt::format("residual={} t={} steps={}", real(r->residual), real(r->t), r->steps)});
    } else {
      lines.push_back({"steady_" + tag, kFail, err});
    }
  };
  line("u", st.u, st.u_error);
  if (spec.has_v) line("v", st.v, st.v_error);
  for (const CheckLine& c : lines) (c.status == kPass ? summary.pass : summary.fail) += 1;
  if (spec.wants("steady") && st.u && (!spec.has_v || st.v)) {
    auto out = files.open("steady.csv");
    write_profiles(out, st.u->profile, st.v ? &st.v->profile : nullptr, "u_star", "v_star");
  }
  write_check_lines(report, lines, false);
  return summary.fail == 0 ? kExitOk : kExitUnmet;
}

int eigen(const ScenarioSpec& spec, OutputSet& files, std::ostream& report, Summary& summary) {
  const Scenario& s = spec.scenario;
  const Steady st = steady_states(spec);
  if (!st.u || (spec.has_v && !st.v)) {
    report << "steady,fail," << (st.u ? st.v_error : st.u_error) << '\n';
    summary.fail = 1;
    return kExitUnmet;
  }
  const SpatialField zero(s.grid(), 0.0);
  struct Named {
    std::string name;
    LinearizedProblem problem;
  };
  std::vector<Named> problems{{"u_at_zero", invasion_problem(s, s.u, zero)}};
  if (spec.has_v) {
    problems.push_back({"v_at_zero", invasion_problem(s, s.v, zero)});
    problems.push_back({"u_at_v_star", invasion_problem(s, s.u, st.v->profile)});
    problems.push_back({"v_at_u_star", invasion_problem(s, s.v, st.u->profile)});
  } else {
    problems.push_back({"u_at_u_star", invasion_problem(s, s.u, st.u->profile)});
  }

  const bool write = spec.wants("eigen");
  std::optional<std::ofstream> summary_out;
  if (write) {
    summary_out.emplace(files.open("eigen.csv"));
    *summary_out << "problem,sigma1,residual,iterations\n";
  }
  for (const Named& p : problems) {
    const EigenResult e = principal_eigen(p.problem);
    report << "sigma1_" << p.name << ",info," << fmt::format("sigma1={} residual={} iterations={}",
                                                             real(e.sigma1), real(e.residual), e.iterations)
           << '\n';
    if (write) {
      *summary_out << p.name << ',' << real(e.sigma1) << ',' << real(e.residual) << ',' << e.iterations << '\n';
      auto out = files.open("eigen_" + p.name + ".csv");
      e.write_csv(out);
    }
  }
  if (spec.has_v) {
    const InstabilityReport cert = instability_certificates(s, st.u->profile, st.v->profile);
    if (write) {
      auto out = files.open("witnesses.csv");
      out << "name,invader,quotient\n";
      for (const Witness& w : cert.witnesses) out << w.name << ',' << w.invader << ',' << real(w.quotient) << '\n';
    }
    for (const Witness& w : cert.witnesses) {
      report << "witness_" << w.name << ",info," << fmt::format("invader={} quotient={}", w.invader, real(w.quotient))
             << '\n';
    }
  }
  return kExitOk;
}

int verify(const ScenarioSpec& spec, const CommandOptions& opt, OutputSet& files, std::ostream& report,
           Summary& summary) {
  VerifyResult result = verify_scenario(spec, opt.hooks);
  if (opt.expect && result.observed) {
    const bool met = parse_outcome_kind(*opt.expect) == result.observed->kind;
    result.checks.push_back(judged("expect", met,
                                   "expected=" + *opt.expect + " observed=" + to_string(result.observed->kind)));
  }
  if (spec.wants("verify")) {
    auto out = files.open("verify.csv");
    write_check_lines(out, result.checks, true);
  }
  if (spec.wants("identities")) {
    auto out = files.open("identities.csv");
    write_report_header(out);
    for (const IdentityReport& r : result.identities) write_report_row(out, r);
  }
  write_check_lines(report, result.checks, false);
  summary.pass = result.count(kPass);
  summary.fail = result.count(kFail);
  summary.skip = result.count(kSkip);
  if (result.observed) summary.outcome = to_string(result.observed->kind);
  return result.passed() ? kExitOk : kExitUnmet;
}

int sweep(const ScenarioSpec& spec, const CommandOptions& opt, OutputSet& files, std::ostream& report,
          Summary& summary) {
  const SweepSpec sw = resolve_sweep(spec, opt.sweep);
  const std::vector<SweepRow> rows = sweep_scenario(spec, sw);
  if (spec.wants("sweep")) {
    auto out = files.open("sweep.csv");
    write_sweep_csv(out, sw.axis, rows);
  }
  for (const SweepRow& r : rows) {
    report << sw.axis << '=' << real(r.value) << ',' << (r.error.empty() ? kInfo : kFail) << ','
           << (r.error.empty() ? r.outcome : r.error) << '\n';
    (r.error.empty() ? summary.pass : summary.fail) += 1;
  }
  return summary.fail == 0 ? kExitOk : kExitUnmet;
}

void write_manifest(const CommandOptions& opt, const ScenarioSpec& spec, OutputSet& files, double seconds,
                    int code, const Summary& summary) {
  nlohmann::ordered_json manifest;
  manifest["command"] = opt.command;
  manifest["scenario_file"] = opt.scenario_file.string();
  manifest["scenario_hash"] = fmt::format("{:016x}", spec.hash);
  manifest["seed"] = spec.seed;
  manifest["outputs"] = files.names();
  manifest["wall_clock_seconds"] = seconds;
  manifest["summary"] = {{"exit_code", code}, {"pass", summary.pass}, {"fail", summary.fail},
                         {"skip", summary.skip}, {"outcome", summary.outcome}};
  std::filesystem::create_directories(files.dir());
  std::ofstream out(files.dir() / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
}

}  // namespace

int run_command(const CommandOptions& options, std::ostream& report, std::ostream& errors) {
  const auto start = std::chrono::steady_clock::now();
  static const std::vector<std::string> commands{"simulate", "steady", "eigen", "verify", "sweep"};
  if (std::find(commands.begin(), commands.end(), options.command) == commands.end()) {
    errors << "error: unknown command '" << options.command << "'\n";
    return kExitInput;
  }
  if (options.expect && options.command != "simulate" && options.command != "verify") {
    errors << "error: --expect applies to simulate and verify only\n";
    return kExitInput;
  }
  try {
    if (options.expect) parse_outcome_kind(*options.expect);
    const ScenarioSpec spec = load_scenario_file(options.scenario_file, options.overrides);
    OutputSet files(options.out_dir);
    Summary summary;
    write_extras(spec, files);
    int code = kExitOk;
    if (options.command == "simulate") {
      code = simulate(spec, options, files, report, summary);
    } else if (options.command == "steady") {
      code = steady(spec, files, report, summary);
    } else if (options.command == "eigen") {
      code = eigen(spec, files, report, summary);
    } else if (options.command == "verify") {
      code = verify(spec, options, files, report, summary);
    } else {
      code = sweep(spec, options, files, report, summary);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(options, spec, files, seconds, code, summary);
    return code;
  } catch (const InputError& e) {
    errors << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const TimestepError& e) {
    errors << "error: timestep: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvalidInput& e) {
    errors << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    errors << "error: " << e.what() << '\n';
    return kExitUnmet;
  } catch (const std::filesystem::filesystem_error& e) {
    errors << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace disperse::cli
