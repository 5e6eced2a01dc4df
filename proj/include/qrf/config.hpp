#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrf/grid.hpp"

namespace qrf {

struct ConfigError : std::runtime_error {
  std::vector<std::string> problems;
  explicit ConfigError(std::vector<std::string> p);
};

// Fully defaulted scenario configuration. Numeric keys are dotted paths
// ("grid.A.n", "masses.mC"); `[section]` headers prefix the keys below them.
struct ScenarioConfig {
  std::map<std::string, double> values;
  std::map<std::string, std::string> strings;  // scenario, case, out
  std::set<std::string> set_keys;              // keys present in the source text

  double get(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  void set(const std::string& key, double v);

  Grid1D grid(const std::string& label) const;
  double mass(const std::string& label) const;
  double hbar() const { return get("constants.hbar"); }
  double c() const { return get("constants.c"); }
  std::uint64_t seed() const;

  // `key = value` text that validates back to the same configuration.
  std::string to_text() const;
};

// Known keys with their defaults, e.g. for documentation.
std::vector<std::pair<std::string, std::string>> config_keys();

ScenarioConfig default_config();
ScenarioConfig validate_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

}  // namespace qrf
