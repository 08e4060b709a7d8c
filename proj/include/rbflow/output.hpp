#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rbflow/monitor.hpp"
#include "rbflow/runner.hpp"

namespace rbflow {

inline constexpr const char* kCsvHeader =
    "t,lambda0,lambda1,Q,rhs31,rhs32,rhs41,fd0,fd1,R_min,R_max,sigma,pinch";

std::string series_csv(const std::vector<MonitorRecord>& records);
std::string summary_json(const RunSummary& summary);
// gnuplot script plotting columns 2-4 of csv_name against column 1.
std::string plot_script(const std::string& csv_name);

// format is one of csv, json, plot. Throws Error on I/O failure or empty records
// (json accepts an empty record list).
std::filesystem::path emit_series(const RunSummary& summary, const std::string& format,
                                  const std::filesystem::path& dir);

}  // namespace rbflow
