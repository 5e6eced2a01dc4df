#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrf/config.hpp"
#include "qrf/grid.hpp"
#include "qrf/measurement.hpp"

namespace qrf {

struct Metric {
  double value = 0.0;
  std::string source;  // operation that produced the value
};

struct ScenarioReport {
  std::string scenario;
  std::map<std::string, bool> verdicts;
  std::map<std::string, Metric> metrics;
  std::vector<std::string> files;
  std::string config_echo;

  void metric(const std::string& name, double value, const std::string& source);
  void verdict(const std::string& name, bool ok);
  double value(const std::string& name) const;
  bool passed() const;
};

struct UnknownScenario : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::vector<std::string> scenario_names();
// Runs a registered scenario. Files go to out_dir (created); an empty out_dir writes nothing.
ScenarioReport run_scenario(const std::string& name, const ScenarioConfig& cfg, const std::string& out_dir);

// `coordinate,re,im,abs2` rows for the reduced state of `label`. abs2 is a density per unit
// coordinate; a mixed marginal is written with re = sqrt(abs2), im = 0.
void emit_csv(const MultiState& s, const std::string& label, const std::string& path);
void emit_distribution_csv(const OutcomeDistribution& d, double bin, const std::string& path);
std::string report_json(const ScenarioReport& r);
void emit_json(const ScenarioReport& r, const std::string& path);

}  // namespace qrf
