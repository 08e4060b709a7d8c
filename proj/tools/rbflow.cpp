#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rbflow/output.hpp"
#include "rbflow/runner.hpp"
#include "rbflow/scenarios.hpp"

namespace {

bool read_text(const std::string& path, std::string& text) {
  std::ifstream in(path);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

void print_summary(const rbflow::RunSummary& s) {
  std::printf("stop: %s at t=%s\n", rbflow::to_string(s.stop_reason).c_str(), rbflow::format_number(s.t_stop).c_str());
  for (const auto& v : s.audits.verdicts) {
    std::printf("  %-22s %-18s %s\n", v.name.c_str(), rbflow::to_string(v.verdict).c_str(), v.detail.c_str());
  }
  if (!s.error.empty()) std::fprintf(stderr, "error: %s\n", s.error.c_str());
  std::printf("exit %d (%.3f s)\n", s.exit_code, s.wall_seconds);
}

int check_one(const rbflow::Scenario& sc) {
  const auto outcome = rbflow::run_builtin(sc);
  std::printf("[%s] %s: exit %d, expected %d\n", outcome.as_expected ? "ok" : "FAIL", sc.name.c_str(),
              outcome.exit_code, sc.expected_exit);
  for (const auto& l : outcome.lines) std::printf("    %s %s\n", l.ok ? "+" : "-", l.text.c_str());
  std::fflush(stdout);
  if (!outcome.as_expected) return outcome.exit_code == 0 ? 1 : outcome.exit_code;
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ricci-Bourguignon flow eigenvalue laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, formats, vary;
  auto* run = app.add_subcommand("run", "run one configuration");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--formats", formats, "comma list of csv, json, plot");

  std::string scenario;
  auto* check = app.add_subcommand("check", "run a builtin scenario, or all of them");
  check->add_option("scenario", scenario, "scenario name or 'all'")->required();
  auto* list = app.add_subcommand("list", "list builtin scenarios");

  auto* sweep = app.add_subcommand("sweep", "run one configuration per value of a key");
  sweep->add_option("--config", config_path, "base config file")->required();
  sweep->add_option("--vary", vary, "key=start:stop:step or key=v1,v2")->required();
  sweep->add_option("--out", out_dir, "output root (default: sweep_out)");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    int width = 0;
    for (const auto& s : rbflow::builtin_scenarios()) width = std::max(width, static_cast<int>(s.name.size()));
    for (const auto& s : rbflow::builtin_scenarios()) {
      std::printf("%-*s  %s\n", width, s.name.c_str(), s.description.c_str());
    }
    return 0;
  }

  if (*check) {
    if (scenario == "all") {
      int failures = 0;
      for (const auto& s : rbflow::builtin_scenarios()) {
        if (check_one(s) != s.expected_exit) ++failures;
      }
      std::printf("%d scenario(s) deviated from their expected outcome\n", failures);
      return failures == 0 ? 0 : 1;
    }
    const auto* s = rbflow::find_scenario(scenario);
    if (!s) {
      std::fprintf(stderr, "unknown scenario '%s' (see 'rbflow list')\n", scenario.c_str());
      return 2;
    }
    return check_one(*s);
  }

  std::string text;
  if (!read_text(config_path, text)) {
    std::fprintf(stderr, "cannot read %s\n", config_path.c_str());
    return 2;
  }

  if (*run) {
    text = rbflow::override_key(text, "out", out_dir);
    if (!formats.empty()) text = rbflow::override_key(text, "formats", formats);
    const auto summary = rbflow::run_config_text(text);
    print_summary(summary);
    return summary.exit_code;
  }

  try {
    const auto axis = rbflow::parse_sweep_axis(vary);
    const auto results =
        rbflow::run_sweep(text, axis, out_dir.empty() ? "sweep_out" : out_dir, rbflow::worker_count());
    int worst = 0;
    for (std::size_t k = 0; k < results.size(); ++k) {
      std::printf("%s=%s -> exit %d%s%s\n", axis.key.c_str(), axis.values[k].c_str(), results[k].exit_code,
                  results[k].error.empty() ? "" : ": ", results[k].error.c_str());
      worst = std::max(worst, results[k].exit_code);
    }
    return worst;
  } catch (const rbflow::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
