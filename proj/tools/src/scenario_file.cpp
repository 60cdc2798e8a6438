#include "disperse/cli/scenario_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "disperse/csv.hpp"
#include "disperse/profile.hpp"

namespace disperse::cli {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"grid", {"n_cells", "x_left", "x_right"}},
      {"profiles", {"K", "P", "Q", "r", "a"}},
      {"species_u", {"d", "r_mult"}},
      {"species_v", {"d", "r_mult"}},
      {"init", {"u0", "v0"}},
      {"stepper", {"dt", "t_end", "tol_steady", "record_every", "steady_window"}},
      {"run", {"seed", "outputs"}},
      {"sweep", {"axis", "from", "to", "count", "spacing"}},
  };
  return keys;
}

const std::set<std::string>& known_outputs() {
  static const std::set<std::string> names{"timeseries", "profiles", "steady", "eigen",
                                           "verify", "identities", "sweep", "operator",
                                           "coefficients"};
  return names;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_real(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InputError(key, fmt::format("expected a real number, got '{}'", text));
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError(key, fmt::format("expected a nonnegative integer, got '{}'", text));
  }
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// Resolved key/value pairs with defaults filled in, in a stable order.
class Resolver {
 public:
  explicit Resolver(const ScenarioDocument& doc) : doc_(doc) {}

  std::string text(const std::string& section, const std::string& key,
                   const std::optional<std::string>& fallback) {
    const Entry* e = doc_.find(section, key);
    std::string value;
    if (e) {
      value = e->value;
    } else if (fallback) {
      value = *fallback;
    } else {
      throw InputError(section + "." + key, "required key is missing");
    }
    record(section, key, value);
    return value;
  }

  void record(const std::string& section, const std::string& key, const std::string& value) {
    resolved_[section + "." + key] = value;
  }

  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : resolved_) out += k + "=" + v + "\n";
    return out;
  }

 private:
  const ScenarioDocument& doc_;
  std::map<std::string, std::string> resolved_;
};

SpatialField sample_profile(const std::string& key, const std::string& text, const Grid1D& grid) {
  ProfileExpr expr = [&] {
    try {
      return parse_profile(text);
    } catch (const ParseError& e) {
      throw InputError(key, fmt::format("cannot parse '{}': {}", text, e.what()));
    }
  }();
  try {
    return sample(expr, grid);
  } catch (const EvalError& e) {
    throw InputError(key, fmt::format("cannot evaluate '{}': {}", text, e.what()));
  } catch (const InvalidInput& e) {
    throw InputError(key, e.what());
  }
}

SpatialField initial_density(const std::string& key, const std::string& text, const SpatialField& K,
                             bool is_v, std::uint64_t seed) {
  if (text == "default") return is_v ? default_initial_v(K) : default_initial_u(K);
  if (text == "random") {
    // v draws from a different stream than u so the two never coincide.
    return random_initial_density(K, is_v ? seed ^ 0x9e3779b97f4a7c15ULL : seed);
  }
  SpatialField f = sample_profile(key, text, K.grid());
  if (f.min() < 0.0) throw InputError(key, "initial density must be nonnegative");
  return f;
}

}  // namespace

InputError::InputError(const std::string& key, const std::string& what)
    : Error(key.empty() ? what : key + ": " + what), key_(key) {}

const Entry* ScenarioDocument::find(const std::string& section, const std::string& key) const {
  auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

ScenarioDocument parse_document(std::string_view text) {
  ScenarioDocument doc;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw InputError("", fmt::format("line {}: malformed section header '{}'", line_no, line));
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_keys().count(section)) {
        throw InputError(section, fmt::format("line {}: unknown section", line_no));
      }
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("", fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
    }
    if (section.empty()) {
      throw InputError("", fmt::format("line {}: assignment before any section header", line_no));
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    const std::string full = section + "." + key;
    if (!known_keys().at(section).count(key)) {
      throw InputError(full, fmt::format("line {}: unknown key", line_no));
    }
    if (value.empty()) throw InputError(full, fmt::format("line {}: empty value", line_no));
    auto [it, inserted] = doc.sections[section].emplace(key, Entry{value, line_no});
    if (!inserted) {
      throw InputError(full, fmt::format("line {}: duplicate key (first set on line {})", line_no,
                                         it->second.line));
    }
  }
  return doc;
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = log_spacing ? std::exp(std::log(from) + s * (std::log(to) - std::log(from)))
                         : from + s * (to - from);
  }
  if (count > 1) out.back() = to;
  return out;
}

void SweepSpec::validate() const {
  if (axis != "d1" && axis != "d2" && axis != "r1" && axis != "r2") {
    throw InputError("sweep.axis", fmt::format("unknown axis '{}' (expected d1, d2, r1 or r2)", axis));
  }
  if (count == 0) throw InputError("sweep.count", "must be positive");
  if (!(from > 0.0) || !(to > 0.0)) throw InputError("sweep.from", "sweep values must be positive");
}

bool ScenarioSpec::wants(const std::string& output) const {
  return outputs.empty() || std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

ScenarioSpec resolve(const ScenarioDocument& doc, const Overrides& overrides) {
  Resolver res(doc);

  const std::size_t n_cells = overrides.n_cells
                                  ? *overrides.n_cells
                                  : parse_unsigned("grid.n_cells", res.text("grid", "n_cells", std::nullopt));
  res.record("grid", "n_cells", std::to_string(n_cells));
  const double x_left = parse_real("grid.x_left", res.text("grid", "x_left", "0"));
  const double x_right = parse_real("grid.x_right", res.text("grid", "x_right", "1"));
  const Grid1D grid = [&] {
    try {
      return Grid1D(n_cells, x_left, x_right);
    } catch (const InvalidInput& e) {
      throw InputError("grid", e.what());
    }
  }();

  const bool has_v = doc.has_section("species_v");
  SpatialField K = sample_profile("profiles.K", res.text("profiles", "K", std::nullopt), grid);
  SpatialField P = sample_profile("profiles.P", res.text("profiles", "P", std::nullopt), grid);
  const std::string q_text = res.text("profiles", "Q", has_v ? std::nullopt
                                                             : std::optional<std::string>(
                                                                   res.text("profiles", "P", std::nullopt)));
  SpatialField Q = sample_profile("profiles.Q", q_text, grid);
  SpatialField r = sample_profile("profiles.r", res.text("profiles", "r", "1"), grid);
  SpatialField a = sample_profile("profiles.a", res.text("profiles", "a", "1"), grid);
  for (auto [name, field] : {std::pair<const char*, const SpatialField*>{"K", &K}, {"P", &P},
                             {"Q", &Q}, {"r", &r}, {"a", &a}}) {
    if (!field->all_positive()) {
      throw InputError(fmt::format("profiles.{}", name),
                       fmt::format("coefficient must be strictly positive (min {})", field->min()));
    }
  }

  auto species = [&](const std::string& section, SpatialField strategy) {
    SpeciesParams p{std::move(strategy)};
    p.d = parse_real(section + ".d", res.text(section, "d", "1"));
    p.r_mult = parse_real(section + ".r_mult", res.text(section, "r_mult", "1"));
    if (!(p.d > 0.0)) throw InputError(section + ".d", "must be positive");
    if (!(p.r_mult > 0.0)) throw InputError(section + ".r_mult", "must be positive");
    return p;
  };
  SpeciesParams su = species("species_u", P);
  SpeciesParams sv = has_v ? species("species_v", Q) : SpeciesParams{Q};

  const std::uint64_t seed =
      overrides.seed ? *overrides.seed : parse_unsigned("run.seed", res.text("run", "seed", "0"));
  res.record("run", "seed", std::to_string(seed));

  SpatialField u0 = initial_density("init.u0", res.text("init", "u0", "default"), K, false, seed);
  SpatialField v0 = has_v ? initial_density("init.v0", res.text("init", "v0", "default"), K, true, seed)
                          : SpatialField(grid, 0.0);
  if (!has_v && doc.find("init", "v0")) {
    throw InputError("init.v0", "given but [species_v] is absent");
  }

  StepperConfig st;
  st.dt = overrides.dt ? *overrides.dt
                       : parse_real("stepper.dt", res.text("stepper", "dt", csv::real(st.dt)));
  res.record("stepper", "dt", csv::real(st.dt));
  st.t_end = parse_real("stepper.t_end", res.text("stepper", "t_end", csv::real(st.t_end)));
  st.tol_steady =
      parse_real("stepper.tol_steady", res.text("stepper", "tol_steady", csv::real(st.tol_steady)));
  st.record_every = parse_unsigned("stepper.record_every",
                                   res.text("stepper", "record_every", std::to_string(st.record_every)));
  st.steady_window = parse_unsigned(
      "stepper.steady_window", res.text("stepper", "steady_window", std::to_string(st.steady_window)));

  ScenarioSpec spec{Scenario{std::move(K), std::move(r), std::move(a), std::move(su), std::move(sv),
                             std::move(u0), std::move(v0), st},
                    has_v, seed, {}, std::nullopt, {}, 0};

  if (const Entry* e = doc.find("run", "outputs")) {
    spec.outputs = split_list(e->value);
    for (const std::string& o : spec.outputs) {
      if (!known_outputs().count(o)) throw InputError("run.outputs", fmt::format("unknown output '{}'", o));
    }
    res.record("run", "outputs", e->value);
  }

  if (doc.has_section("sweep")) {
    SweepSpec sw;
    sw.axis = res.text("sweep", "axis", std::nullopt);
    sw.from = parse_real("sweep.from", res.text("sweep", "from", std::nullopt));
    sw.to = parse_real("sweep.to", res.text("sweep", "to", std::nullopt));
    sw.count = parse_unsigned("sweep.count", res.text("sweep", "count", std::nullopt));
    const std::string spacing = res.text("sweep", "spacing", "linear");
    if (spacing != "linear" && spacing != "log") {
      throw InputError("sweep.spacing", fmt::format("expected 'linear' or 'log', got '{}'", spacing));
    }
    sw.log_spacing = spacing == "log";
    sw.validate();
    spec.sweep = sw;
  }

  try {
    spec.scenario.validate();
  } catch (const TimestepError& e) {
    throw InputError("stepper.dt", e.what());
  } catch (const InvalidInput& e) {
    throw InputError("", e.what());
  }

  spec.canonical = res.canonical();
  spec.hash = fnv1a(spec.canonical);
  return spec;
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("", fmt::format("cannot open scenario file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return resolve(parse_document(buffer.str()), overrides);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace disperse::cli
