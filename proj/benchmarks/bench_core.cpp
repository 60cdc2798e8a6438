#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "disperse/dynamics.hpp"
#include "disperse/operator.hpp"
#include "disperse/profile.hpp"
#include "disperse/spectra.hpp"
#include "disperse/tridiagonal.hpp"

using namespace disperse;

namespace {

SpatialField field(const char* text, const Grid1D& g) { return sample(parse_profile(text), g); }

Scenario scenario(std::size_t n) {
  const Grid1D g(n, 0, 1);
  const SpatialField K = field("1 + 0.8*cos(pi*x)", g);
  return Scenario{K,
                  SpatialField(g, 1.0),
                  SpatialField(g, 1.0),
                  SpeciesParams{field("1 + 0.5*cos(pi*x)", g), 1.0, 1.0},
                  SpeciesParams{SpatialField(g, 1.0), 2.0, 1.0},
                  default_initial_u(K),
                  default_initial_v(K),
                  StepperConfig{}};
}

void BM_OperatorApply(benchmark::State& state) {
  const Grid1D g(static_cast<std::size_t>(state.range(0)), 0, 1);
  const DispersalOperator op =
      DispersalOperator::assemble(field("1 + x", g), field("1 + 0.5*cos(pi*x)", g), 1.0);
  const SpatialField u = field("1 + 0.3*sin(3*x)", g);
  std::vector<double> out(g.n_cells());
  for (auto _ : state) {
    op.apply(u.values(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OperatorApply)->RangeMultiplier(4)->Range(64, 4096);

void BM_ThomasSolve(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  TridiagonalBands a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.diag[i] = 3.0;
    if (i > 0) a.sub[i] = -1.0;
    if (i + 1 < n) a.super[i] = -1.0;
  }
  const TridiagonalLU lu(a);
  std::vector<double> rhs(n, 1.0), x(n);
  for (auto _ : state) {
    lu.solve(rhs, x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ThomasSolve)->RangeMultiplier(4)->Range(64, 4096);

void BM_StepperAdvance(benchmark::State& state) {
  const Scenario sc = scenario(static_cast<std::size_t>(state.range(0)));
  const CompetitionStepper stepper(sc);
  std::vector<double> u(sc.u0.values().begin(), sc.u0.values().end());
  std::vector<double> v(sc.v0.values().begin(), sc.v0.values().end());
  for (auto _ : state) {
    benchmark::DoNotOptimize(stepper.advance(u, v));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StepperAdvance)->Arg(64)->Arg(256)->Arg(1024);

void BM_PrincipalEigen(benchmark::State& state) {
  const Grid1D g(static_cast<std::size_t>(state.range(0)), 0, 1);
  const LinearizedProblem p{
      DispersalOperator::assemble(SpatialField(g, 1.0), field("1 + 0.5*cos(pi*x)", g), 0.5),
      field("1 - 0.8*cos(3*x)", g)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(principal_eigen(p).sigma1);
  }
}
BENCHMARK(BM_PrincipalEigen)->Arg(128)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
