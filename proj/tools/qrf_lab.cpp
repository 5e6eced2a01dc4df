#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qrf/config.hpp"
#include "qrf/parallel.hpp"
#include "qrf/scenarios.hpp"

namespace {

enum Exit { kPass = 0, kConfig = 2, kTolerance = 3, kInternal = 4 };

void print_report(const qrf::ScenarioReport& r) {
  std::cout << "scenario " << r.scenario << "\n";
  for (const auto& [k, m] : r.metrics) std::cout << "  " << k << " = " << m.value << "\n";
  for (const auto& [k, v] : r.verdicts) std::cout << "  [" << (v ? "PASS" : "FAIL") << "] " << k << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum reference frame scenarios"};
  std::string scenario, config_path, out_dir, case_name;
  long long seed = -1;
  int threads = 0;
  bool list = false;
  app.add_option("scenario", scenario, "scenario name");
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--case", case_name, "fig3 case: a, b, c, d or all");
  app.add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads (fallback: QRF_LAB_THREADS)")->check(CLI::NonNegativeNumber);
  app.add_flag("--list", list, "list scenarios and configuration keys");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kConfig;
  }

  if (list) {
    for (const auto& n : qrf::scenario_names()) std::cout << n << "\n";
    std::cout << "\n";
    for (const auto& [k, v] : qrf::config_keys()) std::cout << k << " = " << v << "\n";
    return kPass;
  }

  qrf::ScenarioConfig cfg;
  try {
    cfg = config_path.empty() ? qrf::default_config() : qrf::load_config(config_path);
    if (scenario.empty()) scenario = cfg.get_string("scenario");
    if (scenario.empty()) throw qrf::ConfigError({"no scenario given"});
    cfg.strings["scenario"] = scenario;
    if (!case_name.empty()) cfg.strings["case"] = case_name;
    if (seed >= 0) cfg.set("run.seed", static_cast<double>(seed));
    if (out_dir.empty()) out_dir = cfg.get_string("run.out");
    cfg.strings["run.out"] = out_dir;
  } catch (const qrf::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfig;
  }

  if (threads == 0) {
    if (const char* env = std::getenv("QRF_LAB_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        std::cerr << "QRF_LAB_THREADS must be an integer\n";
        return kConfig;
      }
    }
  }
  qrf::set_thread_count(threads);

  qrf::ScenarioReport report;
  try {
    report = qrf::run_scenario(scenario, cfg, out_dir);
  } catch (const qrf::UnknownScenario& e) {
    std::cerr << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  print_report(report);
  std::cout << "report: " << out_dir << "/" << scenario << ".json\n";
  return report.passed() ? kPass : kTolerance;
}
