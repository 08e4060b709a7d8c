#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rbflow/curvature.hpp"
#include "rbflow/families.hpp"

namespace rbflow {

enum class DtPolicy { Fixed, CflAdaptive };

struct FlowParams {
  double rho = 0.0;
  double c = 0.0;  // spectral coupling, carried for downstream consumers
  int n = 3;
  double dt_init = 1e-3;
  DtPolicy dt_policy = DtPolicy::Fixed;
  double t_max = 1.0;
  double blowup_threshold = 1e6;
  // Samples are recorded at multiples of this interval (steps are clipped to
  // land on them). Zero records every accepted step.
  double sample_interval = 0.0;
  double min_dt = 1e-12;

  bool operator==(const FlowParams&) const = default;
};

// Largest admissible rho: 1/(2(n-1)).
double rho_limit(int n);

// Throws ConfigError. PDE families need rho < 1/(2(n-1)); closed-form families
// also accept equality.
void validate(const FlowParams& params, FamilyKind kind);

enum class StopReason { Horizon, Blowup, StepUnderflow };
std::string to_string(StopReason reason);

struct Sample {
  double t;
  MetricState state;
  CurvatureReport curvature;
};

struct Trajectory {
  FlowParams params;
  std::vector<Sample> samples;
  StopReason stop_reason = StopReason::Horizon;
  double t_stop = 0.0;
};

// Time derivative of the degrees of freedom, as a dof of the same kind.
MetricDof rb_rhs(const MetricState& state, double rho);

// Step size the integrator would use from this state.
double step_size(const MetricState& state, const FlowParams& params);

Trajectory integrate(const MetricState& state0, const FlowParams& params);

// Integrates from `state` to exactly `t_target` with the same stepping rules.
// Throws NumericError if the flow becomes singular before t_target.
MetricState advance(const MetricState& state, const FlowParams& params, double t_target);

// Pole of the comparison solution: 1/(2(1-rho) eps).
double sigma_horizon(double eps, double rho);
// sigma(t) = (1/eps - 2(1-rho) t)^{-1}; DomainError past the pole.
double sigma_bound(double eps, double rho, double t);

// n/(2(1 - n rho) alpha_lb): maximal existence time when R(0) >= alpha_lb > 0.
double blowup_time_bound(int n, double rho, double alpha_lb);

struct EvolutionResiduals {
  double scalar;  // max |dR/dt - ([1-2(n-1)rho] Delta R + 2|Ric|^2 - 2 rho R^2)|
  double volume;  // |dV/dt - (n rho - 1) int R dv|
};

// Central differences over samples index-1, index+1.
EvolutionResiduals evolution_identity_residuals(const Trajectory& traj, std::size_t index);

}  // namespace rbflow
