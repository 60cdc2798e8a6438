#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "disperse/dynamics.hpp"
#include "disperse/field.hpp"
#include "disperse/operator.hpp"

namespace disperse {

/// A scalar comparison between two computed quantities. For identities lhs and
/// rhs should agree; for inequalities `satisfied` records the strict ordering.
struct IdentityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_error = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|, 1e-300)
  bool satisfied = false;
};

double relative_error(double lhs, double rhs);

/// `check_name,lhs,rhs,rel_err,satisfied`
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const IdentityReport& r);

/// Weighted gradient identity at a single-species steady state u*:
///
///   lhs = int r P (u*/K - 1) dx,  rhs = int a |grad(u*/P)|^2 / (u*/P)^2 dx,
///
/// with the right side summed over interior interfaces using the arithmetic
/// mean of (u*/P)^2. `r` and `a` are the effective coefficients (already
/// multiplied by r_mult and d). Satisfied when the sides agree within
/// `rel_tol` (or both vanish to 1e-10 of int r P) and lhs >= 0.
IdentityReport check_gradient_identity(const SpatialField& u_star, const SpatialField& K,
                                       const SpatialField& strategy, const SpatialField& r,
                                       const SpatialField& a, double rel_tol = 0.01,
                                       std::string name = "gradient_identity");

/// lhs = int r K, rhs = int r u*; satisfied iff lhs - rhs > 1e-10 lhs.
IdentityReport check_capacity_deficit(const SpatialField& u_star, const SpatialField& K,
                                      const SpatialField& r,
                                      std::string name = "capacity_deficit");

/// Integral relations at a coexistence steady state (u_s, v_s), S = u_s + v_s:
///   growth_balance      int r (r1 u_s + r2 v_s)(1 - S/K) = 0 within 1e-8 int r K
///   capacity_surplus    int r K (1 - S/K) vs int r K (1 - S/K)^2 (equal, >= 0;
///                       only when r1 == r2)
///   gradient_identity_u / _v   the weighted gradient identity for each species
///                       against the shared crowding S (both sides may vanish
///                       to 1e-8 int r P).
std::vector<IdentityReport> check_coexistence_identities(const SpatialField& u_s,
                                                         const SpatialField& v_s,
                                                         const Scenario& scenario);

struct ThresholdReport {
  double M = 0.0;          // int r K (1 - v*/K)
  double gradient = 0.0;   // int a |grad sqrt(K/P)|^2
  double d_star = 0.0;     // r1 M / gradient
  double r_star = 0.0;     // d1 gradient / M
};

/// Small-diffusion / large-growth thresholds for the invader u against
/// (0, v*). Throws InvalidInput when M <= 0 or the gradient integral vanishes
/// (K proportional to P).
ThresholdReport invasion_thresholds(const Scenario& scenario, const SpatialField& v_star);

enum class OutcomeKind { Coexistence, UWins, VWins, Extinction, Undetermined };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Undetermined;
  double alpha = 0.0;  // meaningful for Coexistence
  double beta = 0.0;
  std::string note;

  static Outcome coexistence(double alpha, double beta, std::string note = {});
  static Outcome of(OutcomeKind kind, std::string note = {});
};

/// "coexistence", "u_wins", "v_wins", "extinction", "undetermined".
std::string to_string(OutcomeKind kind);
/// Inverse of to_string; throws InvalidInput on unknown names.
OutcomeKind parse_outcome_kind(const std::string& text);

struct PredictionTolerances {
  double independence = 1e-8;
  double hull = 1e-8;
  double same_profile = 1e-12;  // relative sup distance for P == Q
  double same_parameter = 1e-12;
};

/// Outcome implied by the theorem hypotheses that the scenario satisfies;
/// Undetermined (with a note) outside all of them.
Outcome predict_outcome(const Scenario& scenario, const PredictionTolerances& tol = {});

struct ClassificationThresholds {
  double extinct = 1e-6;   // sup norm relative to ||K||_inf
  double survive = 1e-3;
  double fit = 1e-3;       // positive-hull fit tolerance
};

/// Outcome observed at the end of a run.
Outcome classify_outcome(const RunResult& run, const Scenario& scenario,
                         const ClassificationThresholds& thresholds = {});

/// div[a grad(K/P)] is not identically zero (relative to the operator scale).
bool noncorrespondence_holds(const SpatialField& K, const SpatialField& strategy,
                             const SpatialField& a, double tol = 1e-8);

/// Kernel and conservation checks for any discrete dispersal map:
///   kernel:        ||L S||_inf <= 1e-13 ||S||_inf
///   conservation:  |h sum (L probe)_i| <= 1e-13 ||probe||_inf ||L||_inf
using ApplyFn = std::function<SpatialField(const SpatialField&)>;
std::vector<IdentityReport> operator_structure_checks(const SpatialField& strategy,
                                                      const ApplyFn& apply, double norm_inf,
                                                      const SpatialField& probe,
                                                      const std::string& prefix);

}  // namespace disperse
