#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "disperse/errors.hpp"
#include "disperse/field.hpp"
#include "oracles.hpp"

using namespace disperse;

namespace {

SpatialField prof(const char* text, const Grid1D& g) { return sample(parse_profile(text), g); }

}  // namespace

TEST_SUITE("field") {
  TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid1D(3, 0, 1), InvalidInput);
    CHECK_THROWS_AS(Grid1D(8, 1, 1), InvalidInput);
    CHECK_THROWS_AS(Grid1D(8, 1, 0), InvalidInput);
    const Grid1D g(37, -0.5, 2.0);
    CHECK(g.h() == doctest::Approx(2.5 / 37));
    const auto c = g.centers();
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(c[i] > g.x_left());
      CHECK(c[i] < g.x_right());
      if (i > 0) CHECK(c[i] > c[i - 1]);
    }
  }

  TEST_CASE("sample at cell centers") {
    const Grid1D g(4, 0, 1);
    const SpatialField x = prof("x", g);
    CHECK(x[0] == 0.125);
    CHECK(x[1] == 0.375);
    CHECK(x[2] == 0.625);
    CHECK(x[3] == 0.875);
    const SpatialField p = prof("pi", Grid1D(16, 0, 3));
    for (double v : p.values()) CHECK(v == std::numbers::pi);
  }

  TEST_CASE("sample reports the failing cell") {
    const Grid1D g(4, 0, 1);
    try {
      prof("1/(x-0.375)", g);
      FAIL("expected an evaluation error");
    } catch (const EvalError& e) {
      CHECK(e.x() == g.center(1));
    }
  }

  TEST_CASE("field invariants") {
    const Grid1D g(4, 0, 1);
    CHECK_THROWS_AS(SpatialField(g, std::vector<double>{1, 2, 3}), InvalidInput);
    CHECK_THROWS_AS(SpatialField(g, std::vector<double>{1, 2, NAN, 4}), InvalidInput);
    CHECK_THROWS_AS(SpatialField(g, std::vector<double>{1, 2, INFINITY, 4}), InvalidInput);
    CHECK_THROWS_AS(SpatialField(g, 1.0) + SpatialField(Grid1D(5, 0, 1), 1.0), InvalidInput);
    CHECK_THROWS_AS(SpatialField(g, std::vector<double>{1, 0, 1, 1}).require_positive("K"), InvalidInput);
  }

  TEST_CASE("integrate: exact cases") {
    const Grid1D g(64, 0, 1);
    CHECK(integrate(SpatialField(g, 1.0)) == 1.0);
    CHECK(integrate(prof("x", g)) == 0.5);
    CHECK(std::abs(integrate(prof("cos(2*pi*x)", Grid1D(128, 0, 1)))) < 1e-12);
  }

  TEST_CASE("integrate is linear") {
    std::mt19937_64 rng(7);
    const Grid1D g(200, -1, 3);
    std::uniform_real_distribution<double> c(-3, 3);
    for (int trial = 0; trial < 50; ++trial) {
      const SpatialField f(g, oracle::random_cells(rng, g.n_cells(), -5, 5));
      const SpatialField h(g, oracle::random_cells(rng, g.n_cells(), -5, 5));
      const double a = c(rng), b = c(rng);
      const double lhs = integrate(a * f + b * h);
      const double rhs = a * integrate(f) + b * integrate(h);
      CHECK(std::abs(lhs - rhs) <= 1e-13 * (std::abs(a) + std::abs(b)) * 5 * g.length());
    }
  }

  TEST_CASE("weighted gradient: exact cases") {
    const Grid1D g(64, 0, 1);
    CHECK(gradient_sq_weighted(SpatialField(g, 3.0), prof("1+x", g)) == 0.0);
    CHECK(gradient_sq_weighted(prof("x", g), SpatialField(g, 1.0)) == doctest::Approx(0.984375).epsilon(1e-14));
  }

  TEST_CASE("weighted gradient of sin: analytic value and Richardson oracle") {
    const double exact = std::numbers::pi * std::numbers::pi / 2.0;
    auto at = [](std::size_t n) {
      const Grid1D g(n, 0, 1);
      return gradient_sq_weighted(prof("sin(pi*x)", g), SpatialField(g, 1.0));
    };
    const double g128 = at(128), g256 = at(256), g512 = at(512);
    CHECK(std::abs(g256 - exact) < 0.01 * exact);
    const auto [limit, order] = oracle::richardson(g128, g256, g512);
    CHECK(order > 0.9);
    CHECK(std::abs(limit - exact) < 1e-4 * exact);
  }

  TEST_CASE("weighted gradient is nonnegative, zero only on constants") {
    std::mt19937_64 rng(11);
    const Grid1D g(50, 0, 1);
    for (int trial = 0; trial < 100; ++trial) {
      const SpatialField f(g, oracle::random_cells(rng, g.n_cells(), -1, 1));
      const SpatialField w(g, oracle::random_cells(rng, g.n_cells(), 0.1, 3));
      CHECK(gradient_sq_weighted(f, w) > 0.0);
      CHECK(gradient_sq_weighted(SpatialField(g, f[0]), w) == 0.0);
    }
  }

  TEST_CASE("linear independence") {
    const Grid1D g(128, 0, 1);
    const SpatialField P = prof("1 + 0.5*cos(pi*x)", g);
    CHECK_FALSE(linearly_independent(P, 3.0 * P));
    CHECK(linearly_independent(P, SpatialField(g, 1.0), 1e-8));
    CHECK_FALSE(linearly_independent(P, P));
    CHECK_THROWS_AS(linearly_independent(P, SpatialField(g, 0.0)), InvalidInput);
  }

  TEST_CASE("positive hull: constructed membership") {
    const Grid1D g(256, 0, 1);
    const SpatialField P = prof("1 + 0.5*cos(pi*x)", g);
    const SpatialField Q = prof("exp(0.3*x)", g);
    const auto hull = positive_hull_coefficients(1.0 * P + 2.0 * Q, P, Q);
    REQUIRE(hull);
    CHECK(hull->alpha == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hull->beta == doctest::Approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("positive hull: sign constraint") {
    const Grid1D g(256, 0, 1);
    const SpatialField P = prof("3 + 0.5*cos(pi*x)", g);
    const SpatialField Q = prof("1 + 0.2*x", g);
    const SpatialField K = P - Q;
    REQUIRE(K.all_positive());
    CHECK_FALSE(positive_hull_coefficients(K, P, Q));
  }

  TEST_CASE("positive hull: cosine capacity") {
    const Grid1D g(256, 0, 1);
    const SpatialField K = prof("2 + 0.5*cos(pi*x)", g);
    const SpatialField P = prof("1 + 0.5*cos(pi*x)", g);
    const SpatialField Q(g, 1.0);
    const auto hull = positive_hull_coefficients(K, P, Q);
    REQUIRE(hull);
    CHECK(std::abs(hull->alpha - 1.0) < 1e-10);
    CHECK(std::abs(hull->beta - 1.0) < 1e-10);
    // Direct substitution.
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n_cells(); ++i) {
      worst = std::max(worst, std::abs(K[i] - hull->alpha * P[i] - hull->beta * Q[i]));
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("positive hull recovers random coefficients") {
    std::mt19937_64 rng(3);
    const Grid1D g(128, 0, 1);
    std::uniform_real_distribution<double> coef(0.05, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
      const SpatialField P(g, oracle::random_smooth_positive(rng, g));
      const SpatialField Q(g, oracle::random_smooth_positive(rng, g));
      if (!linearly_independent(P, Q, 1e-3)) continue;
      const double a = coef(rng), b = coef(rng);
      const auto hull = positive_hull_coefficients(a * P + b * Q, P, Q);
      REQUIRE(hull);
      CHECK(std::abs(hull->alpha - a) <= 1e-10 * a);
      CHECK(std::abs(hull->beta - b) <= 1e-10 * b);
    }
  }

  TEST_CASE("nearly dependent pair is rejected") {
    const Grid1D g(64, 0, 1);
    const SpatialField P = prof("1 + x", g);
    CHECK_THROWS_AS(positive_hull_coefficients(P, P, 2.0 * P), InvalidInput);
  }

  TEST_CASE("csv export") {
    const Grid1D g(4, 0, 1);
    std::ostringstream out;
    write_field_csv(out, prof("1/3 + x", g));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,value");
    std::getline(in, line);
    CHECK(line == "0.125,0.45833333333333331");
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
  }
}
