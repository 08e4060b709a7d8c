#include "rbflow/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <thread>

#include "rbflow/output.hpp"

namespace rbflow {

namespace {

void track(std::map<std::string, Extremum>& extrema, const std::string& name, const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return;
  auto [it, inserted] = extrema.try_emplace(name, Extremum{*v, *v});
  if (!inserted) {
    it->second.min = std::min(it->second.min, *v);
    it->second.max = std::max(it->second.max, *v);
  }
}

std::map<std::string, Extremum> series_extrema(const std::vector<MonitorRecord>& records) {
  std::map<std::string, Extremum> out;
  for (const auto& r : records) {
    track(out, "lambda0", r.lambda0);
    track(out, "lambda1", r.lambda1);
    track(out, "Q", r.Q);
    track(out, "rhs31", r.rhs31);
    track(out, "rhs32", r.rhs32);
    track(out, "rhs41", r.rhs41);
    track(out, "fd0", r.fd0);
    track(out, "fd1", r.fd1);
    track(out, "R_min", r.R_min);
    track(out, "R_max", r.R_max);
    track(out, "sigma", r.sigma);
    track(out, "pinch", r.pinch);
  }
  return out;
}

void write_outputs(const RunSummary& summary) {
  if (summary.config.out_dir.empty()) return;
  for (const auto& format : summary.config.formats) {
    if (format != "json" && summary.records.empty()) continue;
    emit_series(summary, format, summary.config.out_dir);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("sweep: '" + s + "' is not a number (" + what + ")");
  return x;
}

}  // namespace

RunSummary run_scenario(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.config = config;
  try {
    validate(config.family);
    FlowParams params = config.flow;
    params.n = config.family.n;
    validate(params, config.family.kind);

    const MetricState state0 = init_state(config.family);
    summary.hypotheses = hypothesis_check(params, state0, config.a);
    const Trajectory traj = integrate(state0, params);
    summary.t_stop = traj.t_stop;
    summary.stop_reason = traj.stop_reason;

    MonitorOptions mopts;
    mopts.lambda0 = config.lambda0;
    mopts.lambda1 = config.lambda1;
    mopts.lemma32 = config.lemma32;
    mopts.finite_differences = config.finite_differences;
    mopts.stride = config.stride;
    mopts.solver = config.solver;
    summary.records = monitor_trajectory(traj, summary.hypotheses, mopts);
    summary.extrema = series_extrema(summary.records);

    RunContext ctx;
    ctx.stop_reason = traj.stop_reason;
    ctx.t_stop = traj.t_stop;
    ctx.closed_form = !state0.discretized();
    ctx.divergence_bound = config.divergence_bound;
    summary.audits = run_audits(config.audits, summary.records, summary.hypotheses, ctx);

    if (traj.stop_reason == StopReason::StepUnderflow) {
      summary.exit_code = 3;
      summary.error = "time step underflow at t=" + format_number(traj.t_stop);
    } else {
      summary.exit_code = summary.audits.any_failed() ? 1 : 0;
    }
  } catch (const ConfigError& e) {
    summary.exit_code = 2;
    summary.error = e.what();
  } catch (const Error& e) {
    summary.exit_code = 3;
    summary.error = e.what();
  }
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    write_outputs(summary);
  } catch (const Error& e) {
    if (summary.exit_code == 0) summary.exit_code = 3;
    summary.error += (summary.error.empty() ? "" : "; ") + std::string(e.what());
  }
  return summary;
}

RunSummary run_config_text(const std::string& text) {
  try {
    return run_scenario(parse_config(text));
  } catch (const ConfigError& e) {
    RunSummary summary;
    summary.exit_code = 2;
    summary.error = e.what();
    return summary;
  }
}

SweepAxis parse_sweep_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ConfigError("sweep axis must look like key=start:stop:step or key=v1,v2,...");
  }
  SweepAxis axis;
  axis.key = text.substr(0, eq);
  const std::string rest = text.substr(eq + 1);
  if (rest.find(':') == std::string::npos) {
    axis.values = split(rest, ',');
    if (axis.values.empty()) throw ConfigError("sweep: no values for " + axis.key);
    return axis;
  }
  const auto parts = split(rest, ':');
  if (parts.size() != 3) throw ConfigError("sweep range must be start:stop:step");
  const double start = parse_double(parts[0], "start");
  const double stop = parse_double(parts[1], "stop");
  const double step = parse_double(parts[2], "step");
  if (!(step > 0.0) || stop < start) throw ConfigError("sweep range needs step > 0 and stop >= start");
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 100000) throw ConfigError("sweep range has too many values");
  for (long long k = 0; k < count; ++k) axis.values.push_back(format_number(start + static_cast<double>(k) * step));
  return axis;
}

unsigned worker_count() {
  if (const char* env = std::getenv("RBFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunSummary> run_sweep(const std::string& base_text, const SweepAxis& axis,
                                  const std::filesystem::path& out_dir, unsigned workers) {
  const std::size_t total = axis.values.size();
  std::vector<RunSummary> results(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      std::ostringstream name;
      name << "run_" << std::setw(3) << std::setfill('0') << k;
      std::string text = override_key(base_text, axis.key, axis.values[k]);
      text = override_key(text, "out", (out_dir / name.str()).string());
      results[k] = run_config_text(text);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(total)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace rbflow
