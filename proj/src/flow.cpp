#include "rbflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "rbflow/error.hpp"

namespace rbflow {

namespace {

// dof arithmetic for RK4: x + h * k.
MetricDof axpy(const MetricDof& x, double h, const MetricDof& k) {
  return std::visit(
      [&](const auto& xv) -> MetricDof {
        using T = std::decay_t<decltype(xv)>;
        const auto& kv = std::get<T>(k);
        if constexpr (std::is_same_v<T, EinsteinScale>) {
          return EinsteinScale{xv.s + h * kv.s};
        } else if constexpr (std::is_same_v<T, Su2Triple>) {
          return Su2Triple{xv.a + h * kv.a, xv.b + h * kv.b, xv.c + h * kv.c};
        } else {
          return ConformalFactor{xv.u + h * kv.u};
        }
      },
      x);
}

MetricDof rk4_combine(const MetricDof& x, double h, const MetricDof& k1, const MetricDof& k2,
                      const MetricDof& k3, const MetricDof& k4) {
  return std::visit(
      [&](const auto& xv) -> MetricDof {
        using T = std::decay_t<decltype(xv)>;
        const auto& a = std::get<T>(k1);
        const auto& b = std::get<T>(k2);
        const auto& c = std::get<T>(k3);
        const auto& d = std::get<T>(k4);
        const double w = h / 6.0;
        if constexpr (std::is_same_v<T, EinsteinScale>) {
          return EinsteinScale{xv.s + w * (a.s + 2.0 * b.s + 2.0 * c.s + d.s)};
        } else if constexpr (std::is_same_v<T, Su2Triple>) {
          return Su2Triple{xv.a + w * (a.a + 2.0 * b.a + 2.0 * c.a + d.a),
                           xv.b + w * (a.b + 2.0 * b.b + 2.0 * c.b + d.b),
                           xv.c + w * (a.c + 2.0 * b.c + 2.0 * c.c + d.c)};
        } else {
          return ConformalFactor{xv.u + w * (a.u + 2.0 * b.u + 2.0 * c.u + d.u)};
        }
      },
      x);
}

bool admissible(const MetricState& state) {
  try {
    validate(state);
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

// One classical RK4 step; nullopt when an intermediate state is not a metric.
std::optional<MetricState> rk4_step(const MetricState& x, double rho, double h) {
  try {
    const MetricDof k1 = rb_rhs(x, rho);
    const MetricState x2 = with_dof(x, axpy(x.dof, 0.5 * h, k1), x.t + 0.5 * h);
    const MetricDof k2 = rb_rhs(x2, rho);
    const MetricState x3 = with_dof(x, axpy(x.dof, 0.5 * h, k2), x.t + 0.5 * h);
    const MetricDof k3 = rb_rhs(x3, rho);
    const MetricState x4 = with_dof(x, axpy(x.dof, h, k3), x.t + h);
    const MetricDof k4 = rb_rhs(x4, rho);
    MetricState next = with_dof(x, rk4_combine(x.dof, h, k1, k2, k3, k4), x.t + h);
    if (!admissible(next)) return std::nullopt;
    return next;
  } catch (const ConfigError&) {
    return std::nullopt;
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

}  // namespace

double rho_limit(int n) { return 1.0 / (2.0 * (n - 1)); }

void validate(const FlowParams& params, FamilyKind kind) {
  std::vector<std::string> problems;
  if (params.n < 2) problems.push_back("n must be >= 2");
  if (params.n >= 2) {
    const double limit = rho_limit(params.n);
    if (is_conformal(kind) && !(params.rho < limit)) {
      std::ostringstream msg;
      msg << "rho must be < 1/(2(n-1)) = " << limit << " for PDE families";
      problems.push_back(msg.str());
    } else if (!is_conformal(kind) && !(params.rho <= limit)) {
      std::ostringstream msg;
      msg << "rho must be <= 1/(2(n-1)) = " << limit;
      problems.push_back(msg.str());
    }
  }
  if (!(params.dt_init > 0.0)) problems.push_back("dt must be > 0");
  if (!(params.t_max > 0.0)) problems.push_back("t_max must be > 0");
  if (!(params.blowup_threshold > 0.0)) problems.push_back("blowup_threshold must be > 0");
  if (!(params.sample_interval >= 0.0)) problems.push_back("sample_interval must be >= 0");
  if (!(params.min_dt > 0.0)) problems.push_back("min_dt must be > 0");
  if (problems.empty()) return;
  std::ostringstream msg;
  for (std::size_t k = 0; k < problems.size(); ++k) msg << (k ? "; " : "") << problems[k];
  throw ConfigError(msg.str());
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Horizon:
      return "horizon";
    case StopReason::Blowup:
      return "blowup";
    case StopReason::StepUnderflow:
      return "step_underflow";
  }
  return "unknown";
}

MetricDof rb_rhs(const MetricState& state, double rho) {
  validate(state);
  const int n = state.family.n;
  if (std::holds_alternative<EinsteinScale>(state.dof)) {
    return EinsteinScale{-2.0 * (n - 1) * (1.0 - n * rho)};
  }
  if (const auto* m = std::get_if<Su2Triple>(&state.dof)) {
    const auto rep = curvature_report(state);
    const auto& ric = std::get<MilnorRicci>(rep.ric);
    const double R = rep.R[0];
    return Su2Triple{-2.0 * ric.ra + 2.0 * rho * R * m->a, -2.0 * ric.rb + 2.0 * rho * R * m->b,
                     -2.0 * ric.rc + 2.0 * rho * R * m->c};
  }
  const auto rep = curvature_report(state);
  return ConformalFactor{-0.5 * (1.0 - 2.0 * rho) * rep.R};
}

double step_size(const MetricState& state, const FlowParams& params) {
  double dt = params.dt_init;
  if (params.dt_policy == DtPolicy::CflAdaptive) {
    if (const auto* cf = std::get_if<ConformalFactor>(&state.dof)) {
      const double diffusivity = 1.0 - 2.0 * params.rho;
      if (diffusivity > 0.0) {
        const double h = state.base().spacing;
        const double cfl = 0.5 * h * h * std::exp(2.0 * cf->u.minCoeff()) / (4.0 * diffusivity);
        dt = std::min(dt, cfl);
      }
    }
  }
  return dt;
}

Trajectory integrate(const MetricState& state0, const FlowParams& params) {
  validate(params, state0.family.kind);
  validate(state0);
  if (params.n != state0.family.n) throw ConfigError("flow n does not match family n");

  Trajectory traj;
  traj.params = params;
  MetricState x = state0;
  CurvatureReport rep = curvature_report(x);
  traj.samples.push_back({x.t, x, rep});
  if (rep.riem_mag > params.blowup_threshold) {
    traj.stop_reason = StopReason::Blowup;
    traj.t_stop = x.t;
    return traj;
  }

  const double t_end = state0.t + params.t_max;
  const double interval = params.sample_interval;
  long next_sample = 1;
  double dt_cap = std::numeric_limits<double>::infinity();  // shrinks after rejected steps
  bool recorded = true;

  while (true) {
    double target = t_end;
    if (interval > 0.0) target = std::min(target, state0.t + next_sample * interval);
    double dt = std::min(step_size(x, params), dt_cap);
    bool lands = false;
    if (x.t + dt >= target - 1e-12 * std::max(1.0, std::abs(target))) {
      dt = target - x.t;
      lands = true;
    }
    if (!lands && dt < params.min_dt) {
      traj.stop_reason = StopReason::StepUnderflow;
      break;
    }
    auto next = rk4_step(x, params.rho, dt);
    if (!next) {
      dt_cap = 0.5 * dt;
      continue;
    }
    if (lands) next->t = target;
    x = std::move(*next);
    recorded = false;
    rep = curvature_report(x);

    const bool sample_point = interval <= 0.0 || (lands && target < t_end) || x.t >= t_end;
    if (lands && interval > 0.0 && target < t_end) ++next_sample;

    if (rep.riem_mag > params.blowup_threshold) {
      traj.samples.push_back({x.t, x, rep});
      traj.stop_reason = StopReason::Blowup;
      recorded = true;
      break;
    }
    if (sample_point) {
      traj.samples.push_back({x.t, x, rep});
      recorded = true;
    }
    if (x.t >= t_end) {
      traj.stop_reason = StopReason::Horizon;
      break;
    }
  }
  if (!recorded) traj.samples.push_back({x.t, x, rep});
  traj.t_stop = traj.samples.back().t;
  return traj;
}

MetricState advance(const MetricState& state, const FlowParams& params, double t_target) {
  if (t_target < state.t) throw DomainError("advance: target time precedes state time");
  MetricState x = state;
  double dt_cap = std::numeric_limits<double>::infinity();
  while (x.t < t_target) {
    double dt = std::min(step_size(x, params), dt_cap);
    bool lands = false;
    if (x.t + dt >= t_target) {
      dt = t_target - x.t;
      lands = true;
    }
    if (dt < params.min_dt && !lands) throw NumericError("advance: step underflow");
    auto next = rk4_step(x, params.rho, dt);
    if (!next) {
      dt_cap = 0.5 * dt;
      if (dt_cap < params.min_dt) throw NumericError("advance: flow singular before target");
      continue;
    }
    if (lands) next->t = t_target;
    x = std::move(*next);
  }
  return x;
}

double sigma_horizon(double eps, double rho) {
  if (!(eps > 0.0)) throw DomainError("sigma: eps must be > 0");
  if (!(rho < 1.0)) throw DomainError("sigma: rho must be < 1");
  return 1.0 / (2.0 * (1.0 - rho) * eps);
}

double sigma_bound(double eps, double rho, double t) {
  const double horizon = sigma_horizon(eps, rho);
  if (t < 0.0 || t >= horizon) throw DomainError("sigma: t outside [0, T')");
  return 1.0 / (1.0 / eps - 2.0 * (1.0 - rho) * t);
}

double blowup_time_bound(int n, double rho, double alpha_lb) {
  if (!(alpha_lb > 0.0)) throw DomainError("blow-up bound needs alpha > 0");
  if (!(1.0 - n * rho > 0.0)) throw DomainError("blow-up bound needs 1 - n rho > 0");
  return n / (2.0 * (1.0 - n * rho) * alpha_lb);
}

EvolutionResiduals evolution_identity_residuals(const Trajectory& traj, std::size_t index) {
  if (index == 0 || index + 1 >= traj.samples.size()) {
    throw DomainError("evolution residuals need interior sample");
  }
  const auto& prev = traj.samples[index - 1];
  const auto& mid = traj.samples[index];
  const auto& next = traj.samples[index + 1];
  const double span = next.t - prev.t;
  const double rho = traj.params.rho;
  const int n = mid.state.family.n;

  const Eigen::VectorXd& R = mid.curvature.R;
  Eigen::VectorXd lap = Eigen::VectorXd::Zero(R.size());
  if (mid.state.discretized()) lap = laplace_beltrami(mid.state, R);

  const Eigen::VectorXd dRdt = (next.curvature.R - prev.curvature.R) / span;
  const Eigen::VectorXd predicted = (1.0 - 2.0 * (n - 1) * rho) * lap +
                                    2.0 * mid.curvature.ric_norm_sq -
                                    2.0 * rho * R.cwiseProduct(R);
  EvolutionResiduals res{};
  res.scalar = (dRdt - predicted).cwiseAbs().maxCoeff();
  const double dVdt = (volume(next.state) - volume(prev.state)) / span;
  res.volume = std::abs(dVdt - (n * rho - 1.0) * integrate_scalar(mid.state, R));
  return res;
}

}  // namespace rbflow
