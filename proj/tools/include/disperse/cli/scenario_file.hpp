#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disperse/dynamics.hpp"
#include "disperse/errors.hpp"

namespace disperse::cli {

/// Bad scenario input; `key()` is "section.key" (or the section alone) when
/// the problem can be pinned to one.
class InputError : public Error {
 public:
  InputError(const std::string& key, const std::string& what);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct Entry {
  std::string value;
  std::size_t line = 0;
};

/// Sections in file order are not significant; keys within a section are unique.
struct ScenarioDocument {
  std::map<std::string, std::map<std::string, Entry>> sections;

  bool has_section(const std::string& name) const { return sections.count(name) != 0; }
  const Entry* find(const std::string& section, const std::string& key) const;
};

/// Grammar (one statement per line, '#' starts a comment):
///
///   [section]
///   key = value
///
/// Throws InputError on unknown sections or keys, duplicates, or lines that are
/// neither a header nor an assignment.
ScenarioDocument parse_document(std::string_view text);

struct SweepSpec {
  std::string axis;  // d1, d2, r1, r2
  double from = 0.0;
  double to = 0.0;
  std::size_t count = 0;
  bool log_spacing = false;

  std::vector<double> values() const;
  void validate() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_cells;
  std::optional<double> dt;
};

/// A fully resolved scenario: sampled fields plus everything the commands need.
struct ScenarioSpec {
  Scenario scenario;
  bool has_v = true;  // false when [species_v] is absent: v0 = 0, Q = P
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;  // empty: every output of the command
  std::optional<SweepSpec> sweep;
  std::string canonical;  // normalized text the hash is taken over
  std::uint64_t hash = 0;

  bool wants(const std::string& output) const;
};

/// Applies overrides, samples every profile on the grid and validates. Errors
/// name the offending key.
ScenarioSpec resolve(const ScenarioDocument& doc, const Overrides& overrides = {});
ScenarioSpec load_scenario_file(const std::filesystem::path& path, const Overrides& overrides = {});

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace disperse::cli
