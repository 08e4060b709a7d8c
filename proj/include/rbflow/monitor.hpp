#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbflow/curvature.hpp"
#include "rbflow/flow.hpp"
#include "rbflow/spectral.hpp"

namespace rbflow {

struct RescaleParams {
  double eps_max_R0;
  double T_prime;
  double alpha;
};

// alpha = (2c[1-2(n-1)rho] + n rho - 1) / (2(1-rho)), T' = 1/(2(1-rho) eps).
RescaleParams rescale_params(double rho, double c, int n, double R0_max);
// Q = (T' - t)^{-alpha} lambda0.
double rescaled_quantity(double lambda0, double t, const RescaleParams& rp);

// Coefficients of the lambda0 derivative formulas.
double lemma31_A(int n, double rho, double c);
double lemma32_k(int n, double rho);
double lemma32_weight(int n, double rho);

// Integrals of an eigenfunction against curvature weights, all w.r.t. dv.
struct EigenMoments {
  double f2 = 0.0;        // int f^2
  double Rf2 = 0.0;       // int R f^2
  double R2f2 = 0.0;      // int R^2 f^2
  double Ric2f2 = 0.0;    // int |Ric|^2 f^2
  double grad2 = 0.0;     // int |grad f|^2
  double R_grad2 = 0.0;   // int R |grad f|^2
  double Ric_grad = 0.0;  // int Ric(grad f, grad f)
};

EigenMoments eigen_moments(const MetricState& state, const CurvatureReport& report,
                           const SpectralResult& eig);

// int |Ric - 2k Hess(log f)|^2 f^2 dv for a positive eigenfunction. Supported
// on Einstein states (constant f) and torus grids.
double hessian_square_term(const MetricState& state, const CurvatureReport& report,
                           const SpectralResult& eig, double k);

double lemma31_rhs(const MetricState& state, const SpectralResult& eig, const FlowParams& params);
double lemma32_rhs(const MetricState& state, const SpectralResult& eig, const FlowParams& params);
double lemma41_rhs(const MetricState& state, const SpectralResult& eig, const FlowParams& params);

enum class EigenTarget { Lambda0, Lambda1 };

// Eigenvalue of the state at time t on the trajectory (re-integrating from
// the nearest earlier sample when t is not a sample time).
double eigenvalue_at(const Trajectory& traj, EigenTarget which, double t,
                     const SolverOptions& opts = {});
// min(1e-4, (t_stop - t)/10).
double default_fd_step(const Trajectory& traj, double t);
// Central difference; one-sided forward difference when t - h < t_0.
double fd_eigen_derivative(const Trajectory& traj, EigenTarget which, double t, double h,
                           const SolverOptions& opts = {});

struct ThresholdCheck {
  bool holds = false;
  double threshold = 0.0;
};

struct HypothesisReport {
  int n = 0;
  double rho = 0.0;
  double c = 0.0;
  double a = 0.0;
  bool prop_admissibility = false;  // rho < 1/(2(n-1))
  bool rho_within_limit = false;    // rho <= 1/(2(n-1))
  ThresholdCheck thm12_case1;
  ThresholdCheck thm12_case2;
  bool nonneg_curvature_operator = false;
  bool nonneg_ricci = false;
  bool positive_ricci = false;
  bool thm13 = false;
  double thm13_deficit = 0.0;       // min(Ric - ((1+(2-n)rho)/2) R) + a at t = 0
  double thm13_R_bound = 0.0;       // 2a/(1 - n rho)
  bool thm14 = false;
  double R0_min = 0.0;
  double R0_max = 0.0;
  std::optional<double> pinch0;
  std::optional<RescaleParams> rescale;
  std::vector<std::string> notes;
};

// Never throws on unmet hypotheses; they are reported.
HypothesisReport hypothesis_check(const FlowParams& params, const MetricState& state0, double a);

// Certified from closed-form family facts only.
bool nonnegative_curvature_operator(const MetricState& state, const CurvatureReport& report);

struct MonitorRecord {
  double t = 0.0;
  std::optional<double> lambda0;
  std::optional<double> lambda1;
  std::optional<double> Q;
  std::optional<double> rhs31;
  std::optional<double> rhs32;
  std::optional<double> rhs41;
  std::optional<double> fd0;
  std::optional<double> fd1;
  double R_min = 0.0;
  double R_max = 0.0;
  std::optional<double> sigma;
  std::optional<double> pinch;
  double deficit = 0.0;  // Ricci lower-bound deficit at this sample
  std::map<std::string, bool> flags;
};

struct MonitorOptions {
  bool lambda0 = true;
  bool lambda1 = true;
  bool lemma32 = true;
  bool finite_differences = false;
  int stride = 1;
  SolverOptions solver;
};

std::vector<MonitorRecord> monitor_trajectory(const Trajectory& traj, const HypothesisReport& hyp,
                                              const MonitorOptions& opts = {});

enum class Verdict { Pass, Fail, Static, HypothesisNotMet, Skipped };
std::string to_string(Verdict v);

struct AuditVerdict {
  std::string name;
  Verdict verdict = Verdict::Skipped;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditVerdict> verdicts;
  [[nodiscard]] bool any_failed() const;
  [[nodiscard]] const AuditVerdict* find(const std::string& name) const;
};

struct RunContext {
  StopReason stop_reason = StopReason::Horizon;
  double t_stop = 0.0;
  bool closed_form = true;          // derivative tolerances: 1e-2 closed form, 5e-2 grids
  double divergence_bound = 1e3;    // lambda1 must exceed this after blow-up
};

// Per-theorem verdicts: lambda0_increasing, q_increasing, lambda1_increasing, lambda1_divergence, max_r_above_initial.
AuditReport monotonicity_audit(const std::vector<MonitorRecord>& records,
                               const HypothesisReport& hyp, const RunContext& ctx = {});

// Flow-level verdicts: r_min_nondecreasing, sigma_bound, blowup_time_bound,
// pinching_preserved, horizon_before_blowup, derivative_match, rhs_identity.
AuditReport flow_audit(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                       const RunContext& ctx = {});

// Names accepted by run_audits.
const std::vector<std::string>& audit_names();
AuditReport run_audits(const std::vector<std::string>& names,
                       const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                       const RunContext& ctx);

}  // namespace rbflow
