#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rbflow/runner.hpp"

namespace rbflow {

struct CheckLine {
  bool ok;
  std::string text;
};

struct ScenarioOutcome {
  int exit_code = 0;
  bool as_expected = false;
  std::vector<CheckLine> lines;
};

// A named, self-validating run. Config scenarios go through run_scenario and
// then `expect`; custom scenarios (studies that are not a single trajectory)
// supply `custom` instead.
struct Scenario {
  std::string name;
  std::string description;
  std::string config;
  int expected_exit = 0;
  std::function<std::vector<CheckLine>(const RunSummary&)> expect;
  std::function<std::vector<CheckLine>()> custom;
};

const std::vector<Scenario>& builtin_scenarios();
// nullptr when unknown.
const Scenario* find_scenario(const std::string& name);

ScenarioOutcome run_builtin(const Scenario& scenario);

}  // namespace rbflow
