#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "disperse/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace disperse::cli;

  CLI::App app{"disperse: two-species competition with strategy-driven dispersal"};
  app.require_subcommand(1);

  CommandOptions options;
  std::string out_dir = options.out_dir.string();
  std::string expect;
  std::uint64_t seed = 0;
  std::size_t n_cells = 0;
  double dt = 0.0;
  std::string axis, spacing;
  double from = 0.0, to = 0.0;
  std::size_t count = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "integrate the system and classify the outcome"},
      {"steady", "single-species steady states u* and v*"},
      {"eigen", "principal eigenvalues at the trivial and semi-trivial states"},
      {"verify", "run every identity, inequality and outcome check that applies"},
      {"sweep", "outcome and invasion eigenvalues over one parameter"}};
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("scenario", options.scenario_file, "scenario file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override [run] seed");
    sub->add_option("--n-cells", n_cells, "override [grid] n_cells");
    sub->add_option("--dt", dt, "override [stepper] dt");
    if (std::string(name) == "simulate" || std::string(name) == "verify") {
      sub->add_option("--expect", expect, "coexistence, u_wins, v_wins, extinction or undetermined");
    }
    if (std::string(name) == "sweep") {
      sub->add_option("--axis", axis, "d1, d2, r1 or r2");
      sub->add_option("--from", from);
      sub->add_option("--to", to);
      sub->add_option("--count", count);
      sub->add_option("--spacing", spacing, "linear or log");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto given = [sub](const char* name) {
    const CLI::Option* o = sub->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  options.command = sub->get_name();
  options.out_dir = out_dir;
  if (given("--expect")) options.expect = expect;
  if (given("--seed")) options.overrides.seed = seed;
  if (given("--n-cells")) options.overrides.n_cells = n_cells;
  if (given("--dt")) options.overrides.dt = dt;
  if (options.command == "sweep") {
    if (given("--axis")) options.sweep.axis = axis;
    if (given("--from")) options.sweep.from = from;
    if (given("--to")) options.sweep.to = to;
    if (given("--count")) options.sweep.count = count;
    if (given("--spacing")) options.sweep.spacing = spacing;
  }
  return run_command(options, std::cout, std::cerr);
}
