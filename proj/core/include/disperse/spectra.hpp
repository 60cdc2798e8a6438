#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "disperse/dynamics.hpp"
#include "disperse/field.hpp"
#include "disperse/operator.hpp"

namespace disperse {

/// psi -> div[d a grad(psi/S)] + c psi with zero flux of psi/S, where S is the
/// strategy carried by `op` and c is the potential.
struct LinearizedProblem {
  DispersalOperator op;
  SpatialField potential;
};

enum class EigenMethod {
  Auto,              // bisection up to kDenseLimit cells, inverse iteration above
  Bisection,         // Sturm-sequence bisection + inverse iteration for the vector
  InverseIteration,  // shifted inverse iteration from the Gershgorin bound
};

struct EigenOptions {
  static constexpr std::size_t kDenseLimit = 1024;

  EigenMethod method = EigenMethod::Auto;
  std::size_t max_iterations = 10000;
};

struct EigenResult {
  double sigma1 = 0.0;
  SpatialField psi;  // positive, max psi = 1
  double residual = 0.0;  // ||L psi + c psi - sigma1 psi||_inf
  std::size_t iterations = 0;
  EigenMethod method = EigenMethod::Auto;

  /// `x,psi` rows.
  void write_csv(std::ostream& out) const;
  /// `sigma1,residual,iterations` header and value line.
  void write_summary(std::ostream& out) const;
};

/// Largest eigenvalue and its positive eigenfunction.
///
/// In w = psi/S the problem is the symmetric generalized eigenproblem
/// A w = sigma B w with B = diag(h S_i); it is solved through the similar
/// symmetric tridiagonal matrix B^{-1/2} A B^{-1/2}. Throws ConvergenceError
/// when inverse iteration exhausts max_iterations.
EigenResult principal_eigen(const LinearizedProblem& problem, const EigenOptions& options = {});

/// [-sum_{i+1/2} d a (grad w)^2 h + h sum c trial^2/S] / (h sum trial^2/S), w = trial/S.
/// Never exceeds sigma1 beyond rounding. Throws InvalidInput on a zero trial.
double rayleigh_quotient(const LinearizedProblem& problem, const SpatialField& trial);

/// Linearization of `invader` around a state where the resident total density
/// is `resident`: potential r_mult r (1 - resident/K).
LinearizedProblem invasion_problem(const Scenario& scenario, const SpeciesParams& invader,
                                   const SpatialField& resident);

/// A trial function evaluated in an invader's Rayleigh quotient.
struct Witness {
  std::string name;
  std::string invader;  // "u" or "v"
  double quotient = 0.0;
};

struct InstabilityReport {
  double sigma_u_at_zero = 0.0;
  double sigma_v_at_zero = 0.0;
  double sigma_v_at_u_star = 0.0;  // invader v against (u*, 0)
  double sigma_u_at_v_star = 0.0;  // invader u against (0, v*)
  std::vector<Witness> witnesses;

  const Witness* find(const std::string& name) const;
};

/// Principal eigenvalues at the trivial and both semi-trivial states, plus the
/// lower-bound witnesses sqrt(beta) Q and sqrt(alpha) P (only when K lies in the
/// positive hull of P and Q), sqrt(K P), sqrt(K Q), and the residents u*, v*.
InstabilityReport instability_certificates(const Scenario& scenario, const SpatialField& u_star,
                                           const SpatialField& v_star,
                                           const EigenOptions& options = {});

}  // namespace disperse
