#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "disperse/analysis.hpp"
#include "disperse/cli/scenario_file.hpp"

namespace disperse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitUnmet = 2;

/// One report line `name,status,detail`; status is pass, fail, skip or info.
struct CheckLine {
  std::string name;
  std::string status;
  std::string detail;
};

void write_check_lines(std::ostream& out, const std::vector<CheckLine>& lines, bool header);

struct VerifyHooks {
  /// When set, replaces the dispersal map used by the operator structure checks.
  std::function<ApplyFn(const DispersalOperator&)> operator_apply;
};

struct VerifyResult {
  std::vector<CheckLine> checks;
  std::vector<IdentityReport> identities;
  Outcome predicted;
  std::optional<Outcome> observed;

  std::size_t count(const std::string& status) const;
  bool passed() const { return count("fail") == 0; }
};

/// Every check whose hypotheses the scenario meets; the rest are reported as
/// skipped with the reason. Deterministic for a fixed scenario and seed.
VerifyResult verify_scenario(const ScenarioSpec& spec, const VerifyHooks& hooks = {});

struct SweepRow {
  double value = 0.0;
  std::string outcome;  // to_string(OutcomeKind) or "error"
  double sigma_u_at_v_star = 0.0;
  double sigma_v_at_u_star = 0.0;
  std::string error;
};

/// Points are evaluated concurrently and returned in parameter order.
std::vector<SweepRow> sweep_scenario(const ScenarioSpec& spec, const SweepSpec& sweep);

/// `param,value,outcome,sigma1_at_(0,v*),sigma1_at_(u*,0)`
void write_sweep_csv(std::ostream& out, const std::string& axis, const std::vector<SweepRow>& rows);

/// Copy of `scenario` with one of d1, d2, r1, r2 replaced.
Scenario with_parameter(const Scenario& scenario, const std::string& axis, double value);

struct SweepOverrides {
  std::optional<std::string> axis;
  std::optional<double> from;
  std::optional<double> to;
  std::optional<std::size_t> count;
  std::optional<std::string> spacing;
};

struct CommandOptions {
  std::string command;  // simulate, steady, eigen, verify, sweep
  std::filesystem::path scenario_file;
  std::filesystem::path out_dir = "disperse-out";
  std::optional<std::string> expect;
  Overrides overrides;
  SweepOverrides sweep;
  VerifyHooks hooks;
};

/// Runs one command, writing CSV files and manifest.json into out_dir and
/// report lines to `report`. Returns kExitOk, kExitInput or kExitUnmet.
int run_command(const CommandOptions& options, std::ostream& report, std::ostream& errors);

}  // namespace disperse::cli
