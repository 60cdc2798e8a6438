#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "disperse/dynamics.hpp"
#include "disperse/errors.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace disperse;

namespace {

Scenario heterogeneous(std::size_t n = 128) {
  fixture::Spec s;
  s.n = n;
  s.K = "1 + 0.5*cos(pi*x)";
  s.P = "1 + 0.3*sin(pi*x)";
  s.Q = "1";
  return fixture::make(s);
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("zero stays zero") {
    const Scenario sc = heterogeneous(64);
    const Grid1D& g = sc.grid();
    State s{0.0, SpatialField(g, 0.0), SpatialField(g, 0.0)};
    const CompetitionStepper stepper(sc);
    for (int i = 0; i < 100; ++i) s = stepper.step(s);
    CHECK(s.u.sup_norm() == 0.0);
    CHECK(s.v.sup_norm() == 0.0);
    CHECK(s.t == doctest::Approx(0.1));
  }

  TEST_CASE("homogeneous state follows the logistic map") {
    fixture::Spec spec;
    spec.n = 32;
    const Scenario sc = fixture::make(spec);
    const Grid1D& g = sc.grid();
    const double dt = sc.stepper.dt;
    for (double u0 : {0.1, 0.5, 0.9, 1.3}) {
      const State next = step(State{0.0, SpatialField(g, u0), SpatialField(g, 0.0)}, sc);
      const double expected = u0 + dt * u0 * (1.0 - u0);
      for (std::size_t i = 0; i < 32; ++i) CHECK(next.u[i] == doctest::Approx(expected).epsilon(1e-14));
      CHECK(next.v.sup_norm() == 0.0);
    }
  }

  TEST_CASE("without growth, mass is conserved") {
    std::mt19937_64 rng(11);
    fixture::Spec spec;
    spec.n = 100;
    spec.K = "1 + 0.5*cos(pi*x)";
    spec.P = "2 + sin(3*x)";
    spec.Q = "1 + x";
    spec.a = "1 + x*x";
    Scenario sc = fixture::make(spec);
    sc.r = SpatialField(sc.grid(), 1e-300);
    sc.stepper.dt = 0.01;
    const CompetitionStepper stepper(sc);
    State s{0.0, SpatialField(sc.grid(), oracle::random_cells(rng, 100, 0.0, 1.0)),
            SpatialField(sc.grid(), oracle::random_cells(rng, 100, 0.0, 1.0))};
    const double mu = integrate(s.u);
    const double mv = integrate(s.v);
    for (int i = 0; i < 200; ++i) s = stepper.step(s);
    CHECK(std::abs(integrate(s.u) - mu) <= 1e-12 * mu);
    CHECK(std::abs(integrate(s.v) - mv) <= 1e-12 * mv);
  }

  TEST_CASE("single-species subspaces are invariant") {
    Scenario sc = heterogeneous(64);
    sc.v0 = SpatialField(sc.grid(), 0.0);
    sc.stepper.t_end = 5.0;
    RunResult r = run(sc);
    CHECK(r.final_state.v.sup_norm() == 0.0);
    CHECK(r.final_state.u.min() > 0.0);

    sc.u0 = SpatialField(sc.grid(), 0.0);
    sc.v0 = default_initial_v(sc.K);
    r = run(sc);
    CHECK(r.final_state.u.sup_norm() == 0.0);
    CHECK(r.final_state.v.min() > 0.0);
  }

  TEST_CASE("ideal free equilibrium is steady immediately") {
    fixture::Spec spec;
    spec.K = "1 + 0.5*cos(pi*x)";
    spec.P = "0.5*(1 + 0.5*cos(pi*x))";
    Scenario sc = fixture::make(spec);
    sc.u0 = sc.K;
    sc.v0 = SpatialField(sc.grid(), 0.0);
    const RunResult r = run(sc);
    CHECK(r.steady);
    CHECK(r.steps == sc.stepper.steady_window);
    CHECK(relative_sup_distance(r.final_state.u, sc.K) < 1e-12);
  }

  TEST_CASE("resident alone converges to its single-species steady state") {
    Scenario sc = heterogeneous(64);
    sc.u0 = SpatialField(sc.grid(), 0.0);
    const RunResult r = run(sc);
    REQUIRE(r.steady);
    CHECK(r.final_state.u.sup_norm() == 0.0);
    const SteadyResult v_star = solve_single_steady(sc.K, sc.r, sc.a, sc.v, sc.stepper);
    CHECK(relative_sup_distance(r.final_state.v, v_star.profile) < 1e-6);
  }

  TEST_CASE("single-species steady state") {
    SUBCASE("strategy proportional to K") {
      fixture::Spec spec;
      spec.K = "1 + 0.5*cos(pi*x)";
      spec.P = "3 + 1.5*cos(pi*x)";
      const Scenario sc = fixture::make(spec);
      const SteadyResult s = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper);
      CHECK(relative_sup_distance(s.profile, sc.K) < 1e-10);
      const SteadyResult cold = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper,
                                                    SpatialField(sc.grid(), 0.4));
      CHECK(relative_sup_distance(cold.profile, sc.K) < 1e-8);
    }
    SUBCASE("independent strategy undershoots the capacity") {
      const Scenario sc = heterogeneous(256);
      const SteadyResult s = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper);
      CHECK(s.residual <= 1e-8 * hadamard(sc.r, sc.K).sup_norm());
      CHECK(stationary_residual(sc.operator_u(), s.profile, sc.K, sc.r, 1.0) == doctest::Approx(s.residual));
      CHECK(integrate(hadamard(sc.r, sc.K)) > integrate(hadamard(sc.r, s.profile)));
      CHECK(relative_sup_distance(s.profile, sc.K) > 1e-3);
    }
    SUBCASE("constant K with a nonconstant strategy") {
      fixture::Spec spec;
      spec.K = "1.5";
      spec.P = "1 + 0.4*cos(pi*x)";
      const Scenario sc = fixture::make(spec);
      const SteadyResult s = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper);
      CHECK(relative_sup_distance(s.profile, sc.K) > 1e-3);
      CHECK(s.profile.min() > 0.0);
    }
    SUBCASE("budget exhaustion reports the residual") {
      Scenario sc = heterogeneous(64);
      sc.stepper.t_end = 0.01;
      try {
        solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper);
        FAIL("expected ConvergenceError");
      } catch (const ConvergenceError& e) {
        CHECK(e.achieved() > 0.0);
        CHECK(std::string(e.what()).find("residual") != std::string::npos);
      }
    }
  }

  TEST_CASE("steady state does not depend on the time step") {
    Scenario sc = heterogeneous(128);
    sc.stepper.tol_steady = 1e-11;
    const SteadyResult coarse = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper);
    sc.stepper.dt = 5e-4;
    const SteadyResult fine = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper);
    CHECK(relative_sup_distance(coarse.profile, fine.profile) < 1e-6);
  }

  TEST_CASE("scaling d and r_mult together leaves the steady state unchanged") {
    Scenario sc = heterogeneous(128);
    sc.stepper.tol_steady = 1e-12;
    const SteadyResult one = solve_single_steady(sc.K, sc.r, sc.a, sc.u, sc.stepper);
    SpeciesParams doubled = sc.u;
    doubled.d = 2.0;
    doubled.r_mult = 2.0;
    const SteadyResult two = solve_single_steady(sc.K, sc.r, sc.a, doubled, sc.stepper);
    CHECK(relative_sup_distance(one.profile, two.profile) < 1e-8);
  }

  TEST_CASE("positivity is preserved") {
    std::mt19937_64 rng(12);
    const Scenario sc = heterogeneous(64);
    const CompetitionStepper stepper(sc);
    for (int trial = 0; trial < 10; ++trial) {
      State s{0.0, SpatialField(sc.grid(), oracle::random_cells(rng, 64, 0.0, 1.4)),
              SpatialField(sc.grid(), oracle::random_cells(rng, 64, 0.0, 1.4))};
      const double floor = -1e-10 * sc.K.sup_norm();
      for (int i = 0; i < 200; ++i) {
        s = stepper.step(s);
        REQUIRE(s.u.min() >= floor);
        REQUIRE(s.v.min() >= floor);
      }
      State p{0.0, SpatialField(sc.grid(), oracle::random_cells(rng, 64, 1e-3, 1.0)),
              SpatialField(sc.grid(), oracle::random_cells(rng, 64, 1e-3, 1.0))};
      for (int i = 0; i < 200; ++i) p = stepper.step(p);
      CHECK(p.u.min() > 0.0);
      CHECK(p.v.min() > 0.0);
    }
  }

  TEST_CASE("an oversized time step is diagnosed") {
    Scenario sc = heterogeneous(64);
    sc.stepper.dt = 10.0;
    sc.stepper.t_end = 100.0;
    CHECK_THROWS_AS(sc.validate(), TimestepError);
    CHECK_THROWS_AS(run(sc), TimestepError);
    const CompetitionStepper stepper(sc);
    CHECK_THROWS_WITH_AS(stepper.step(State{0.0, sc.u0, sc.v0}), doctest::Contains("reaction bound"),
                         TimestepError);
  }

  TEST_CASE("validation") {
    Scenario sc = heterogeneous(32);
    sc.u.d = 0.0;
    CHECK_THROWS_AS(sc.validate(), InvalidInput);
    sc = heterogeneous(32);
    sc.v.r_mult = -1.0;
    CHECK_THROWS_AS(sc.validate(), InvalidInput);
    sc = heterogeneous(32);
    sc.u0 = SpatialField(sc.grid(), -0.1);
    CHECK_THROWS_AS(sc.validate(), InvalidInput);
    sc = heterogeneous(32);
    sc.stepper.tol_steady = 0.0;
    CHECK_THROWS_AS(sc.validate(), InvalidInput);
    sc = heterogeneous(32);
    sc.stepper.t_end = sc.stepper.dt / 2;
    CHECK_THROWS_AS(sc.validate(), InvalidInput);
  }

  TEST_CASE("random initial density is seeded and bounded") {
    const Grid1D g(128, 0, 1);
    const SpatialField K = fixture::field("1 + 0.5*cos(pi*x)", g);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SpatialField a = random_initial_density(K, seed);
      const SpatialField b = random_initial_density(K, seed);
      CHECK(relative_sup_distance(a, b) == 0.0);
      const SpatialField ratio = divide(a, K);
      CHECK(ratio.min() >= 0.05 - 1e-12);
      CHECK(ratio.max() <= 0.95 + 1e-12);
    }
    CHECK(relative_sup_distance(random_initial_density(K, 1), random_initial_density(K, 2)) > 0.0);
  }

  TEST_CASE("default initial data") {
    const Grid1D g(10, 0, 2);
    const SpatialField K = fixture::field("1 + x", g);
    const SpatialField u0 = default_initial_u(K);
    const SpatialField v0 = default_initial_v(K);
    CHECK(u0[3] == doctest::Approx(0.3 * K[3]));
    CHECK(v0[0] == doctest::Approx(K[0] * (0.3 + 0.01 * std::cos(std::numbers::pi * 0.05))));
  }

  TEST_CASE("time series") {
    Scenario sc = heterogeneous(32);
    sc.stepper.t_end = 3.0;
    sc.stepper.record_every = 250;
    const RunResult r = run(sc);
    REQUIRE(r.series.samples.size() == 12);
    for (std::size_t i = 1; i < r.series.samples.size(); ++i) {
      CHECK(r.series.samples[i].t > r.series.samples[i - 1].t);
    }
    CHECK(r.series.samples.back().t == doctest::Approx(3.0));
    CHECK(r.final_state.t == doctest::Approx(3.0));
    CHECK_FALSE(r.steady);
    std::ostringstream out;
    r.series.write_csv(out);
    CHECK(out.str().rfind("t,mass_u,mass_v,sup_u,sup_v,rate_u,rate_v\n", 0) == 0);
  }
}
