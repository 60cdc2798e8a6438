#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "disperse/analysis.hpp"
#include "disperse/errors.hpp"
#include "disperse/spectra.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace disperse;

namespace {

LinearizedProblem problem(const std::string& a, const std::string& S, double d, const std::string& c,
                          std::size_t n = 128) {
  const Grid1D g(n, 0, 1);
  return LinearizedProblem{DispersalOperator::assemble(fixture::field(a, g), fixture::field(S, g), d),
                           fixture::field(c, g)};
}

// Symmetric matrix similar to L + diag(c), built directly from a, S, d, c.
oracle::Matrix symmetric_form(const SpatialField& a, const SpatialField& S, double d, const SpatialField& c) {
  const std::size_t n = a.size();
  const double h = a.grid().h();
  oracle::Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double k = d * 0.5 * (a[i] + a[i + 1]) / (h * h);
    m[i][i] -= k / S[i];
    m[i + 1][i + 1] -= k / S[i + 1];
    m[i][i + 1] = m[i + 1][i] = k / std::sqrt(S[i] * S[i + 1]);
  }
  for (std::size_t i = 0; i < n; ++i) m[i][i] += c[i];
  return m;
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("constant potential") {
    for (double c0 : {-2.0, 0.0, 0.7, 3.5}) {
      const LinearizedProblem p = problem("1 + x", "1 + 0.5*cos(pi*x)", 1.3, std::to_string(c0), 256);
      const EigenResult e = principal_eigen(p);
      CHECK(std::abs(e.sigma1 - c0) <= 1e-10);
      CHECK(relative_sup_distance(e.psi, (1.0 / p.op.strategy().max()) * p.op.strategy()) < 1e-8);
      CHECK(e.psi.max() == doctest::Approx(1.0));
    }
  }

  TEST_CASE("zero is a repeller") {
    const LinearizedProblem p = problem("1", "1 + 0.3*sin(2*x)", 1.0, "0.5 + x*x", 128);
    const EigenResult e = principal_eigen(p);
    CHECK(e.sigma1 >= p.potential.min());
    CHECK(e.sigma1 <= p.potential.max());
  }

  TEST_CASE("agrees with dense Jacobi") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const Grid1D g(24 + trial, 0, 1);
      const SpatialField a(g, oracle::random_smooth_positive(rng, g));
      const SpatialField S(g, oracle::random_smooth_positive(rng, g));
      const SpatialField c(g, oracle::random_cells(rng, g.n_cells(), -1, 1));
      const double d = 0.01 * (trial + 1);
      const LinearizedProblem p{DispersalOperator::assemble(a, S, d), c};
      const std::vector<double> ev = oracle::jacobi_eigenvalues(symmetric_form(a, S, d, c));
      const double top = *std::max_element(ev.begin(), ev.end());
      for (EigenMethod m : {EigenMethod::Bisection, EigenMethod::InverseIteration}) {
        const EigenResult e = principal_eigen(p, EigenOptions{m, 10000});
        CHECK(e.sigma1 == doctest::Approx(top).epsilon(1e-10));
        CHECK(e.psi.min() > 0.0);
      }
    }
  }

  TEST_CASE("methods agree and large grids use inverse iteration") {
    const LinearizedProblem p = problem("1 + 0.5*x", "1 + 0.5*cos(pi*x)", 0.2, "1 - 0.8*cos(3*x)", 512);
    const EigenResult b = principal_eigen(p, EigenOptions{EigenMethod::Bisection, 10000});
    const EigenResult i = principal_eigen(p, EigenOptions{EigenMethod::InverseIteration, 10000});
    CHECK(b.method == EigenMethod::Bisection);
    CHECK(i.method == EigenMethod::InverseIteration);
    CHECK(b.sigma1 == doctest::Approx(i.sigma1).epsilon(1e-10));
    CHECK(relative_sup_distance(b.psi, i.psi) < 1e-7);
    CHECK(principal_eigen(p).method == EigenMethod::Bisection);

    const LinearizedProblem big = problem("1", "1 + 0.5*cos(pi*x)", 0.5, "cos(2*x)", 2048);
    const EigenResult e = principal_eigen(big);
    CHECK(e.method == EigenMethod::InverseIteration);
    CHECK(e.residual <= 1e-8 * (big.potential.sup_norm() + std::abs(e.sigma1)) * e.psi.sup_norm());
  }

  TEST_CASE("residual and positivity invariants") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 10; ++trial) {
      const Grid1D g(200, 0, 1);
      const SpatialField a(g, oracle::random_smooth_positive(rng, g));
      const SpatialField S(g, oracle::random_smooth_positive(rng, g));
      const SpatialField c(g, oracle::random_smooth_positive(rng, g, -2.0, 1.0));
      const LinearizedProblem p{DispersalOperator::assemble(a, S, 0.5), c};
      const EigenResult e = principal_eigen(p);
      SpatialField r = p.op.apply(e.psi) + hadamard(c, e.psi) - e.sigma1 * e.psi;
      CHECK(r.sup_norm() <= 1e-8 * (c.sup_norm() + std::abs(e.sigma1)) * e.psi.sup_norm());
      CHECK(std::abs(e.residual - r.sup_norm()) <= 1e-12 * (c.sup_norm() + std::abs(e.sigma1)));
      CHECK(e.psi.min() > 0.0);
    }
  }

  TEST_CASE("Rayleigh quotient") {
    std::mt19937_64 rng(23);
    const LinearizedProblem p = problem("1 + x", "2 - x", 0.3, "sin(5*x)", 128);
    const EigenResult e = principal_eigen(p);
    CHECK(std::abs(rayleigh_quotient(p, e.psi) - e.sigma1) <= 1e-9);
    const double expected = integrate(hadamard(p.potential, p.op.strategy())) / integrate(p.op.strategy());
    CHECK(rayleigh_quotient(p, p.op.strategy()) == doctest::Approx(expected).epsilon(1e-13));
    for (int trial = 0; trial < 200; ++trial) {
      const SpatialField t(p.op.grid(), oracle::random_cells(rng, 128, -1, 1));
      CHECK(rayleigh_quotient(p, t) <= e.sigma1 + 1e-10);
      CHECK(rayleigh_quotient(p, 3.7 * t) == doctest::Approx(rayleigh_quotient(p, t)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(rayleigh_quotient(p, SpatialField(p.op.grid(), 0.0)), InvalidInput);
  }

  TEST_CASE("shift covariance") {
    const LinearizedProblem p = problem("1", "1 + 0.4*cos(pi*x)", 0.8, "x - x*x", 200);
    const EigenResult e = principal_eigen(p);
    for (double s : {-3.0, 0.25, 10.0}) {
      const LinearizedProblem q{p.op, p.potential + SpatialField(p.op.grid(), s)};
      const EigenResult f = principal_eigen(q);
      CHECK(f.sigma1 - e.sigma1 == doctest::Approx(s).epsilon(1e-10));
      CHECK(relative_sup_distance(e.psi, f.psi) < 1e-8);
    }
  }

  TEST_CASE("steady state is its own principal eigenfunction") {
    fixture::Spec spec;
    spec.K = "1 + 0.5*cos(pi*x)";
    spec.P = "1 + 0.3*sin(pi*x)";
    const Scenario sc = fixture::make(spec);
    const SteadyResult u = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper);
    const EigenResult e = principal_eigen(invasion_problem(sc, sc.u, u.profile));
    CHECK(std::abs(e.sigma1) <= 1e-7);
    CHECK(oracle::pearson(oracle::values(e.psi), oracle::values(u.profile)) > 1 - 1e-8);
  }

  TEST_CASE("certificates for an ideal free pair") {
    fixture::Spec spec;
    spec.P = "1 + 0.5*cos(pi*x)";
    spec.Q = "1 + 0.4*x";
    spec.K = "(1 + 0.5*cos(pi*x)) + 2*(1 + 0.4*x)";
    const Scenario sc = fixture::make(spec);
    const SpatialField u_star = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper).profile;
    const SpatialField v_star = solve_single_steady(sc.K, sc.r, sc.a, sc.v, sc.stepper).profile;
    const InstabilityReport rep = instability_certificates(sc, u_star, v_star);
    CHECK(rep.sigma_u_at_zero > 0.0);
    CHECK(rep.sigma_v_at_zero > 0.0);
    CHECK(rep.sigma_v_at_u_star > 0.0);
    CHECK(rep.sigma_u_at_v_star > 0.0);
    const Witness* wq = rep.find("sqrt_beta_Q");
    const Witness* wp = rep.find("sqrt_alpha_P");
    REQUIRE(wq != nullptr);
    REQUIRE(wp != nullptr);
    CHECK(wq->quotient > 0.0);
    CHECK(wq->quotient <= rep.sigma_v_at_u_star + 1e-10);
    CHECK(wp->quotient > 0.0);
    CHECK(wp->quotient <= rep.sigma_u_at_v_star + 1e-10);
    for (const Witness& w : rep.witnesses) {
      const double bound = w.invader == "u" ? rep.sigma_u_at_v_star : rep.sigma_v_at_u_star;
      CHECK(w.quotient <= bound + 1e-10);
    }
    CHECK(rep.find("nope") == nullptr);
  }

  TEST_CASE("certificates for an ideal free resident") {
    fixture::Spec spec;
    spec.K = "1 + 0.8*cos(pi*x)";
    spec.P = "0.5*(1 + 0.8*cos(pi*x))";
    spec.Q = "1";
    const Scenario sc = fixture::make(spec);
    const SpatialField u_star = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper).profile;
    const SpatialField v_star = solve_single_steady(sc.K, sc.r, sc.a, sc.v, sc.stepper).profile;
    const InstabilityReport rep = instability_certificates(sc, u_star, v_star);
    CHECK(rep.sigma_u_at_v_star > 0.0);
    CHECK(rep.sigma_v_at_u_star <= 1e-10);
    CHECK(rep.find("sqrt_beta_Q") == nullptr);
  }

  TEST_CASE("slower disperser witness value") {
    fixture::Spec spec;
    spec.K = "1 + 0.8*cos(pi*x)";
    spec.d1 = 1.0;
    spec.d2 = 2.0;
    const Scenario sc = fixture::make(spec);
    const SpatialField u_star = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper).profile;
    const SpatialField v_star = solve_single_steady(sc.K, sc.r, sc.a, sc.v, sc.stepper).profile;
    const InstabilityReport rep = instability_certificates(sc, u_star, v_star);
    CHECK(rep.sigma_u_at_v_star > 0.0);
    CHECK(rep.sigma_v_at_u_star < 0.0);
    const Witness* w = rep.find("v_star");
    REQUIRE(w != nullptr);
    const SpatialField& P = sc.u.strategy;
    const double expected = (sc.v.d - sc.u.d) * gradient_sq_weighted(divide(v_star, P), sc.a) /
                            integrate(divide(hadamard(v_star, v_star), P));
    CHECK(w->quotient == doctest::Approx(expected).epsilon(1e-4));
    CHECK(w->quotient > 0.0);
  }

  TEST_CASE("eigenvalue sign predicts invasion in the dynamics") {
    fixture::Spec spec;
    spec.n = 128;
    spec.K = "1 + 0.8*cos(pi*x)";
    spec.d1 = 1.0;
    spec.d2 = 2.0;
    Scenario sc = fixture::make(spec);
    const SpatialField u_star = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper).profile;
    const SpatialField v_star = solve_single_steady(sc.K, sc.r, sc.a, sc.v, sc.stepper).profile;
    const InstabilityReport rep = instability_certificates(sc, u_star, v_star);
    sc.stepper.t_end = 20.0;

    const SpatialField seed = 1e-4 * sc.K;
    const RunResult into_v = run_from(sc, State{0.0, seed, v_star});
    const bool u_grew = into_v.final_state.u.sup_norm() > seed.sup_norm();
    CHECK(u_grew == (rep.sigma_u_at_v_star > 0.0));

    const RunResult into_u = run_from(sc, State{0.0, u_star, seed});
    const bool v_grew = into_u.final_state.v.sup_norm() > seed.sup_norm();
    CHECK(v_grew == (rep.sigma_v_at_u_star > 0.0));
  }

  TEST_CASE("export") {
    const LinearizedProblem p = problem("1", "1", 1.0, "2", 8);
    const EigenResult e = principal_eigen(p);
    std::ostringstream rows, summary;
    e.write_csv(rows);
    e.write_summary(summary);
    CHECK(rows.str().rfind("x,psi\n0.0625,", 0) == 0);
    CHECK(summary.str().rfind("sigma1,residual,iterations\n2,", 0) == 0);
  }

  TEST_CASE("grid mismatch") {
    const Grid1D g(16, 0, 1);
    const LinearizedProblem p{DispersalOperator::assemble(SpatialField(g, 1.0), SpatialField(g, 1.0), 1.0),
                              SpatialField(Grid1D(17, 0, 1), 1.0)};
    CHECK_THROWS_AS(principal_eigen(p), InvalidInput);
  }
}
