// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rbflow/runner.hpp"
#include "rbflow/scenarios.hpp"
#include "rbflow/spectral.hpp"

using namespace rbflow;

namespace {

constexpr double kPi = std::numbers::pi;

struct Result {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool rel_close(double value, double target, double tol) { return std::abs(value - target) <= tol * std::abs(target); }

std::string num(double x) { return format_number(x); }

RunSummary run(const std::string& text, Result& res) {
  auto s = run_config_text(text);
  res.require(s.exit_code == 0, "run exit code " + std::to_string(s.exit_code) + (s.error.empty() ? "" : ": " + s.error));
  res.require(!s.records.empty(), "monitor records present");
  return s;
}

// Every consecutive pair of present values strictly increases.
template <class Get>
bool strictly_increasing(const std::vector<MonitorRecord>& recs, Get get, std::size_t& pairs) {
  std::optional<double> prev;
  pairs = 0;
  for (const auto& r : recs) {
    const auto v = get(r);
    if (!v) continue;
    if (prev) {
      if (!(*v > *prev)) return false;
      ++pairs;
    }
    prev = v;
  }
  return true;
}

Result criterion1() {
  Result res;
  const auto start = std::chrono::steady_clock::now();
  const auto s = run("family = einstein_sphere\nn = 3\nrho = 0\ns0 = 1\ndt = 1e-3\nt_max = 1\n"
                     "sample_interval = 0.01\neigenpairs = none\n",
                     res);
  const double elapsed = seconds_since(start);
  if (s.records.empty()) return res;
  const double bound = blowup_time_bound(3, 0.0, s.records.front().R_min);
  res.detail << "t_stop=" << num(s.t_stop) << " bound=" << num(bound) << " runtime=" << num(elapsed) << "s";
  res.require(s.stop_reason == StopReason::Blowup, "stopped by blow-up");
  res.require(std::abs(s.t_stop - 0.25) <= 1e-3, "|t_stop - 0.25| <= 1e-3");
  res.require(std::abs(bound - 0.25) <= 1e-12, "bound n/(2(1-n rho)R(0)) = 3/12");
  res.require(std::abs(s.t_stop - bound) <= 1e-3, "t_stop equals the bound within 1e-3");
  res.require(elapsed < 1.0, "runtime < 1 s");
  return res;
}

Result criterion2() {
  Result res;
  {
    const auto start = std::chrono::steady_clock::now();
    FamilySpec spec;
    spec.kind = FamilyKind::ConformalTorus2D;
    spec.n = 2;
    spec.resolution = 64;
    const auto eig = first_nonzero_eigenpair(init_state(spec));
    const double elapsed = seconds_since(start);
    res.detail << "torus lambda1=" << num(eig.lambda) << " (" << num(elapsed) << "s)";
    res.require(eig.converged, "torus eigenpair converged");
    res.require(rel_close(eig.lambda, 4.0 * kPi * kPi, 1e-2), "torus lambda1 = 4 pi^2 within 1%");
    res.require(elapsed < 30.0, "torus runtime < 30 s");
  }
  {
    const auto start = std::chrono::steady_clock::now();
    FamilySpec spec;
    spec.kind = FamilyKind::ConformalSphere2D;
    spec.n = 2;
    spec.resolution = 5;
    const auto pairs = smallest_eigenpairs(build_operators(init_state(spec), 0.0), 4, Constraint::FirstNonzeroMeanZero);
    const double elapsed = seconds_since(start);
    res.detail << "; icosphere lambda=";
    for (const auto& p : pairs) res.detail << num(p.lambda) << " ";
    res.detail << "(" << num(elapsed) << "s)";
    for (int k = 0; k < 3; ++k) {
      res.require(pairs[k].converged && rel_close(pairs[k].lambda, 2.0, 1e-2), "icosphere copy " + std::to_string(k + 1) + " = 2 within 1%");
    }
    res.require(!rel_close(pairs[3].lambda, 2.0, 1e-2), "multiplicity exactly 3");
    res.require(elapsed < 30.0, "icosphere runtime < 30 s");
  }
  return res;
}

// Closed-form value of rhs31 = rhs32 at t = 0 and the finite-difference match.
void lowest_identity(Result& res, const std::string& label, const std::string& text, double target) {
  const auto s = run(text, res);
  if (s.records.empty()) return;
  const auto& r0 = s.records.front();
  if (!r0.rhs31 || !r0.rhs32) {
    res.require(false, label + " right-hand sides present");
    return;
  }
  res.detail << label << " rhs31=" << num(*r0.rhs31) << " rhs32=" << num(*r0.rhs32);
  res.require(rel_close(*r0.rhs31, target, 1e-10), label + " rhs31 = " + num(target));
  double worst = 0.0;
  for (const auto& r : s.records) {
    if (!r.rhs31 || !r.rhs32 || !r.fd0) continue;
    res.require(rel_close(*r.rhs32, *r.rhs31, 1e-10), label + " rhs31 = rhs32 within 1e-10 at t=" + num(r.t));
    worst = std::max(worst, std::abs(*r.fd0 - *r.rhs31) / std::abs(*r.rhs31));
  }
  res.detail << " max fd rel err=" << num(worst) << "; ";
  res.require(r0.fd0.has_value(), label + " finite difference present");
  res.require(worst <= 1e-2, label + " fd dlambda0/dt within 1%");
}

Result criterion3() {
  Result res;
  lowest_identity(res, "S^3", "family = einstein_sphere\nn = 3\nrho = 0.1\nc = 0.75\ns0 = 1\ndt = 1e-3\nt_max = 0.05\n"
                  "sample_interval = 0.01\neigenpairs = lambda0\nfd = true\n", 12.6);
  lowest_identity(res, "S^2", "family = einstein_sphere\nn = 2\nrho = 0\nc = 0.5\ns0 = 1\ndt = 1e-3\nt_max = 0.1\n"
                  "sample_interval = 0.02\neigenpairs = lambda0\nfd = true\n", 2.0);
  return res;
}

void first_nonzero_match(Result& res, const std::string& label, const std::string& text, double target, double tol) {
  const auto s = run(text, res);
  if (s.records.empty()) return;
  const auto& r0 = s.records.front();
  if (!r0.rhs41) {
    res.require(false, label + " right-hand side present");
    return;
  }
  if (target > 0.0) {
    res.require(rel_close(*r0.rhs41, target, 1e-10), label + " rhs41 = " + num(target));
  }
  double worst = 0.0;
  int compared = 0;
  for (const auto& r : s.records) {
    if (!r.rhs41 || !r.fd1) continue;
    worst = std::max(worst, std::abs(*r.fd1 - *r.rhs41) / std::abs(*r.rhs41));
    ++compared;
  }
  res.detail << label << " rhs41(0)=" << num(*r0.rhs41) << " max fd rel err=" << num(worst) << " over " << compared << "; ";
  res.require(compared > 0, label + " finite differences present");
  res.require(worst <= tol, label + " fd dlambda1/dt within " + num(tol));
}

Result criterion4() {
  Result res;
  first_nonzero_match(res, "S^2", "family = einstein_sphere\nn = 2\nrho = 0\ns0 = 1\ndt = 1e-3\nt_max = 0.1\n"
                      "sample_interval = 0.02\neigenpairs = lambda1\nfd = true\n", 4.0, 1e-2);
  first_nonzero_match(res, "S^3", "family = einstein_sphere\nn = 3\nrho = 0\ns0 = 1\ndt = 1e-3\nt_max = 0.1\n"
                      "sample_interval = 0.02\neigenpairs = lambda1\nfd = true\n", 12.0, 1e-2);
  first_nonzero_match(res, "torus64", "family = conformal_torus\nn = 2\nrho = 0\nresolution = 64\npreset = cos_x\n"
                      "amplitude = 0.1\nt_max = 4e-3\nsample_interval = 1e-3\neigenpairs = lambda1\nfd = true\n", 0.0, 5e-2);
  return res;
}

Result criterion5() {
  Result res;
  const double T_prime = 1.0 / 10.8;
  const auto s = run("family = einstein_sphere\nn = 3\nrho = 0.1\nc = 0.75\ns0 = 1\ndt = 5e-4\nt_max = " +
                         num(0.9 * T_prime) + "\nsample_interval = 0.0025\neigenpairs = lambda0\n",
                     res);
  const auto& h = s.hypotheses;
  res.require(h.thm12_case2.holds, "coupling threshold met");
  if (!h.rescale || s.records.empty() || !s.records.front().Q) {
    res.require(false, "rescaled quantity present");
    return res;
  }
  std::vector<MonitorRecord> window;
  for (const auto& r : s.records) {
    if (r.t <= 0.9 * T_prime * (1.0 + 1e-12)) window.push_back(r);
  }
  std::size_t pairs = 0;
  const bool inc = strictly_increasing(window, [](const MonitorRecord& r) { return r.Q; }, pairs);
  const double q0 = *s.records.front().Q;
  res.detail << "alpha=" << num(h.rescale->alpha) << " T'=" << num(h.rescale->T_prime) << " Q(0)=" << num(q0)
             << " increasing pairs=" << pairs << " last t=" << num(window.back().t);
  res.require(rel_close(h.rescale->alpha, 1.0 / 9.0, 1e-12), "alpha = 1/9");
  res.require(rel_close(h.rescale->T_prime, T_prime, 1e-12), "T' = 1/10.8");
  res.require(inc && pairs >= 10, "Q strictly increasing at every sampled pair");
  res.require(window.back().t >= 0.9 * T_prime * (1.0 - 1e-9), "samples cover [0, 0.9 T']");
  res.require(rel_close(q0, 5.8652, 1e-3), "Q(0) = 5.8652 within 0.1%");
  return res;
}

Result criterion6() {
  Result res;
  const auto s = run("family = einstein_sphere\nn = 3\nrho = -0.5\nc = 0.6\ns0 = 1\ndt = 5e-4\nt_max = 0.09\n"
                     "sample_interval = 0.005\neigenpairs = lambda0\n",
                     res);
  std::size_t pairs = 0;
  const bool inc = strictly_increasing(s.records, [](const MonitorRecord& r) { return r.lambda0; }, pairs);
  res.detail << "threshold=" << num(s.hypotheses.thm12_case1.threshold) << " R0_min=" << num(s.hypotheses.R0_min)
             << " increasing pairs=" << pairs;
  res.require(s.hypotheses.thm12_case1.holds, "c >= threshold");
  res.require(rel_close(s.hypotheses.thm12_case1.threshold, 1.0 / 3.0, 1e-12), "threshold = 1/3");
  res.require(s.hypotheses.R0_min > 0.0, "R(0) > 0");
  res.require(inc && pairs >= 10, "lambda0 strictly increasing");
  return res;
}

Result criterion7() {
  Result res;
  const auto s = run("family = conformal_sphere\nn = 2\nrho = 0.1\nresolution = 3\npreset = cos_x\namplitude = 0.1\n"
                     "a = 0\nt_max = 0.3\nsample_interval = 0.01\neigenpairs = lambda1\n",
                     res);
  const auto& h = s.hypotheses;
  std::size_t pairs = 0;
  const bool inc = strictly_increasing(s.records, [](const MonitorRecord& r) { return r.lambda1; }, pairs);
  res.detail << "R0_min=" << num(h.R0_min) << " bound 2a/(1-n rho)=" << num(h.thm13_R_bound)
             << " deficit=" << num(h.thm13_deficit) << " increasing pairs=" << pairs;
  res.require(h.R0_min >= 0.0, "R(0) >= 0");
  res.require(h.thm13_deficit == 0.0, "deficit identically 0 in n = 2");
  res.require(h.thm13 && h.R0_min >= h.thm13_R_bound, "R >= 2a/(1 - n rho) at t = 0");
  res.require(inc && pairs >= 10, "lambda1 strictly increasing");
  return res;
}

Result criterion8() {
  Result res;
  int runs = 0, sigma_runs = 0, moving_runs = 0;
  for (const auto& sc : builtin_scenarios()) {
    if (sc.config.empty() || sc.expected_exit != 0) continue;
    Result local;
    const auto s = run(sc.config, local);
    if (!local.ok) {
      res.require(false, sc.name + ":" + local.detail.str());
      continue;
    }
    ++runs;
    const auto& recs = s.records;
    for (std::size_t k = 1; k < recs.size(); ++k) {
      if (recs[k].R_min - recs[k - 1].R_min < -1e-8) {
        res.require(false, sc.name + " R_min decreases at t=" + num(recs[k].t));
        break;
      }
    }
    const bool is_static = std::all_of(recs.begin(), recs.end(), [](const MonitorRecord& r) {
      const auto it = r.flags.find("static");
      return it != r.flags.end() && it->second;
    });
    if (!is_static) {
      ++moving_runs;
      const double beta = recs.front().R_min;
      for (const auto& r : recs) {
        if (r.t > recs.front().t && !(r.R_max > beta)) {
          res.require(false, sc.name + " max R <= min R(0) at t=" + num(r.t));
          break;
        }
      }
    }
    if (s.hypotheses.nonneg_curvature_operator && s.hypotheses.R0_max > 0.0) {
      ++sigma_runs;
      const double horizon = sigma_horizon(s.hypotheses.R0_max, s.config.flow.rho);
      for (const auto& r : recs) {
        if (r.t >= horizon) break;
        const double sigma = sigma_bound(s.hypotheses.R0_max, s.config.flow.rho, r.t);
        if (r.R_max > sigma * (1.0 + 1e-6)) {
          res.require(false, sc.name + " R_max > sigma at t=" + num(r.t));
          break;
        }
      }
    }
  }
  res.detail << runs << " builtin runs, " << moving_runs << " non-static, " << sigma_runs << " with sigma bound";
  res.require(runs >= 10, "builtin runs executed");
  return res;
}

Result criterion9() {
  Result res;
  const auto s = run("family = su2\nn = 3\nrho = 0\nsu2_a = 1\nsu2_b = 1\nsu2_c = 0.8\ndt = 1e-4\nt_max = 1\n"
                     "sample_interval = 0.005\n",
                     res);
  if (s.records.empty() || !s.records.front().pinch) {
    res.require(false, "pinching present");
    return res;
  }
  const double p0 = *s.records.front().pinch;
  double lowest = p0;
  for (const auto& r : s.records) {
    res.require(r.pinch.has_value(), "pinching at t=" + num(r.t));
    if (r.pinch) lowest = std::min(lowest, *r.pinch);
  }
  res.detail << "pinch(0)=" << num(p0) << " min pinch=" << num(lowest) << " samples=" << s.records.size()
             << " t_stop=" << num(s.t_stop) << " (" << to_string(s.stop_reason) << ")";
  res.require(lowest >= p0 - 1e-8, "pinch(t) >= pinch(0) - 1e-8");
  return res;
}

Result criterion10() {
  Result res;
  const auto s = run("family = einstein_sphere\nn = 3\nrho = 0\ns0 = 1\ndt = 1e-3\nt_max = 1\n"
                     "sample_interval = 0.01\neigenpairs = lambda1\n",
                     res);
  double worst = 0.0, top = 0.0;
  for (const auto& r : s.records) {
    if (!r.lambda1) {
      res.require(false, "lambda1 at t=" + num(r.t));
      continue;
    }
    const double target = 1.5 * (1.0 / 3.0) * r.R_min;
    worst = std::max(worst, std::abs(*r.lambda1 - target) / target);
    if (r.t <= s.t_stop) top = std::max(top, *r.lambda1);
  }
  res.detail << "max rel err=" << num(worst) << " max lambda1=" << num(top) << " t_stop=" << num(s.t_stop);
  res.require(s.stop_reason == StopReason::Blowup, "stopped by blow-up");
  res.require(worst <= 1e-6, "lambda1 = (3/2)(1/3) R_min within 1e-6");
  res.require(top > 1e3, "lambda1 exceeds 1e3 before t_stop");
  return res;
}

Result criterion11() {
  Result res;
  const double eps = 0.1;
  const double lo = std::pow(1.0 + eps, -3.0), hi = std::pow(1.0 + eps, 3.0);
  FamilySpec flat;
  flat.kind = FamilyKind::ConformalTorus2D;
  flat.n = 2;
  flat.resolution = 32;
  const auto base = init_state(flat);
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (int seed = 1; seed <= 20; ++seed) {
    FamilySpec bumped = flat;
    bumped.initial.preset = Preset::RandomBand;
    bumped.initial.amplitude = std::log(1.1) / 2.0;
    bumped.seed = static_cast<std::uint64_t>(seed);
    const auto audit = continuity_ratio_check(base, init_state(bumped), eps);
    rmin = std::min(rmin, audit.lambda1_ratio);
    rmax = std::max(rmax, audit.lambda1_ratio);
    res.require(audit.metric_gap <= std::log(1.1) / 2.0 * (1.0 + 1e-12), "max|du| = ln(1.1)/2 for seed " + std::to_string(seed));
    res.require(audit.lambda1_ratio >= lo && audit.lambda1_ratio <= hi, "ratio in bounds for seed " + std::to_string(seed));
  }
  res.detail << "20 trials, ratios in [" << num(rmin) << ", " << num(rmax) << "], bounds [" << num(lo) << ", " << num(hi) << "]";
  return res;
}

Trajectory torus_run(int resolution, Preset preset, double sample_interval, double t_max) {
  FamilySpec spec;
  spec.kind = FamilyKind::ConformalTorus2D;
  spec.n = 2;
  spec.resolution = resolution;
  spec.initial.preset = preset;
  spec.initial.amplitude = preset == Preset::Zero ? 0.0 : 0.1;
  FlowParams params;
  params.n = 2;
  params.dt_policy = DtPolicy::CflAdaptive;
  params.sample_interval = sample_interval;
  params.t_max = t_max;
  return integrate(init_state(spec), params);
}

Result criterion12() {
  Result res;
  const double t_probe = 0.01;
  std::vector<double> scalar, vol, floor;
  for (int level = 0; level < 3; ++level) {
    const double dt_sample = 0.005 / (1 << level);
    const auto traj = torus_run(16 << level, Preset::CosX, dt_sample, t_probe + dt_sample);
    std::size_t index = 0;
    while (index < traj.samples.size() && std::abs(traj.samples[index].t - t_probe) > 1e-12) ++index;
    if (index == 0 || index + 1 >= traj.samples.size()) {
      res.require(false, "probe time sampled");
      return res;
    }
    const auto r = evolution_identity_residuals(traj, index);
    scalar.push_back(r.scalar);
    vol.push_back(r.volume);
    // Torus area is conserved, so the volume identity compares two zeros and its
    // difference quotient bottoms out at roundoff of this size.
    floor.push_back(1e3 * std::numeric_limits<double>::epsilon() * volume(traj.samples[index].state) / (2.0 * dt_sample));
    res.detail << "N=" << (16 << level) << " r_scalar=" << num(r.scalar) << " r_volume=" << num(r.volume) << "; ";
  }
  for (std::size_t k = 1; k < scalar.size(); ++k) {
    const double p = std::log2(scalar[k - 1] / scalar[k]);
    res.detail << "order " << num(p) << "; ";
    res.require(p >= 1.8, "r_scalar order >= 1.8");
    if (vol[k - 1] <= floor[k - 1] && vol[k] <= floor[k]) {
      res.detail << "r_volume at roundoff floor; ";
    } else {
      const double pv = std::log2(vol[k - 1] / vol[k]);
      res.detail << "volume order " << num(pv) << "; ";
      res.require(pv >= 1.8, "r_volume order >= 1.8");
    }
  }
  const auto flat = torus_run(16, Preset::Zero, 0.005, 0.015);
  const auto r0 = evolution_identity_residuals(flat, 1);
  res.detail << "static residuals " << num(r0.scalar) << ", " << num(r0.volume);
  res.require(r0.scalar == 0.0 && r0.volume == 0.0, "static residuals exactly 0");
  return res;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Result (*check)();
  };
  const Criterion criteria[] = {
      {1, "Einstein blow-up time", criterion1},
      {2, "closed-form spectra", criterion2},
      {3, "lowest eigenvalue derivative identities", criterion3},
      {4, "first nonzero eigenvalue derivative", criterion4},
      {5, "rescaled lowest eigenvalue monotone", criterion5},
      {6, "lowest eigenvalue monotone, rho < 0", criterion6},
      {7, "first nonzero eigenvalue monotone on conformal sphere", criterion7},
      {8, "scalar curvature bounds on builtin runs", criterion8},
      {9, "SU(2) pinching preserved", criterion9},
      {10, "first nonzero eigenvalue divergence on round S^3", criterion10},
      {11, "eigenvalue ratio bounds under conformal perturbation", criterion11},
      {12, "evolution identity residual convergence", criterion12},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Result r;
    try {
      r = c.check();
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail << "exception: " << e.what();
    }
    if (!r.ok) ++failures;
    std::printf("criterion %2d %s: %s | %s\n", c.id, r.ok ? "PASS" : "FAIL", c.name, r.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
