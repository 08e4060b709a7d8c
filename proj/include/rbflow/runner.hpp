#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rbflow/config.hpp"
#include "rbflow/flow.hpp"
#include "rbflow/monitor.hpp"

namespace rbflow {

struct Extremum {
  double min;
  double max;
};

struct RunSummary {
  RunConfig config;
  double t_stop = 0.0;
  StopReason stop_reason = StopReason::Horizon;
  HypothesisReport hypotheses;
  AuditReport audits;
  std::map<std::string, Extremum> extrema;  // per monitored series with at least one value
  double wall_seconds = 0.0;
  int exit_code = 0;  // 0 ok, 1 audit failed, 2 configuration error, 3 numerical failure
  std::string error;
  std::vector<MonitorRecord> records;
};

// Runs one configuration end to end. Module errors are caught and mapped to
// exit codes; outputs are written to config.out_dir when it is nonempty.
RunSummary run_scenario(const RunConfig& config);

// Parses first; a ConfigError yields exit code 2 and an empty run.
RunSummary run_config_text(const std::string& text);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

// "rho=0:0.2:0.05" (inclusive range) or "seed=1,2,3".
SweepAxis parse_sweep_axis(const std::string& text);

// Worker count: RBFLOW_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

// One run per axis value, each in its own subdirectory of out_dir.
std::vector<RunSummary> run_sweep(const std::string& base_text, const SweepAxis& axis,
                                  const std::filesystem::path& out_dir, unsigned workers);

}  // namespace rbflow
