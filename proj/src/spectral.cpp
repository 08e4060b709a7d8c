#include "rbflow/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "rbflow/curvature.hpp"
#include "rbflow/error.hpp"

namespace rbflow {

namespace {

double binomial(int n, int k) {
  if (k < 0 || n < k) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

// Dimension of degree-k spherical harmonics on S^n.
int harmonic_multiplicity(int n, int k) {
  return static_cast<int>(binomial(n + k, k) - binomial(n + k - 2, k - 2));
}

// Deterministic sign: positive M-mean, else first significant entry positive.
void fix_sign(Eigen::VectorXd& f, const Eigen::VectorXd& mass) {
  const double mean = mass.dot(f);
  const double scale = std::sqrt(mass.sum()) * f.cwiseAbs().maxCoeff();
  double sign = 1.0;
  if (std::abs(mean) > 1e-8 * scale) {
    sign = mean > 0.0 ? 1.0 : -1.0;
  } else {
    const double cutoff = 1e-8 * f.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (std::abs(f[i]) > cutoff) {
        sign = f[i] > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
  }
  f *= sign;
}

std::vector<SpectralResult> closed_form_pairs(const DiscreteOperators& ops, const EinsteinSpectrum& es,
                                              int count, Constraint constraint) {
  const double shift = ops.c * ops.R[0];
  std::vector<SpectralResult> out;
  const double vol = unit_sphere_volume(es.n) * std::pow(es.s, 0.5 * es.n);
  for (int k = constraint == Constraint::Lowest ? 0 : 1; static_cast<int>(out.size()) < count; ++k) {
    const int mult = harmonic_multiplicity(es.n, k);
    for (int m = 0; m < mult && static_cast<int>(out.size()) < count; ++m) {
      SpectralResult r;
      r.lambda = k * (k + es.n - 1) / es.s + shift;
      if (k == 0) r.f = Eigen::VectorXd::Constant(1, 1.0 / std::sqrt(vol));
      r.constraint = constraint;
      r.normalized = true;
      r.closed_form = true;
      r.converged = true;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::HypothesisNotMet:
      return "hypothesis-not-met";
    case CheckStatus::Flagged:
      return "flagged";
  }
  return "unknown";
}

DiscreteOperators build_operators(const MetricState& state, double c) {
  validate(state);
  DiscreteOperators ops;
  ops.c = c;
  if (std::holds_alternative<Su2Triple>(state.dof)) {
    throw UnsupportedFamily("spectral operators are not offered on the SU(2) family");
  }
  const auto rep = curvature_report(state);
  ops.R = rep.R;
  if (const auto* e = std::get_if<EinsteinScale>(&state.dof)) {
    ops.rep = EinsteinSpectrum{state.family.n, e->s};
    return ops;
  }
  MatrixOperators mat;
  mat.geometry = state.geometry;
  mat.mass = volume_weights(state);
  mat.potential = c == 0.0 ? Eigen::VectorXd::Zero(mat.mass.size())
                           : Eigen::VectorXd(c * rep.R.cwiseProduct(mat.mass));
  ops.rep = std::move(mat);
  return ops;
}

std::vector<SpectralResult> smallest_eigenpairs(const DiscreteOperators& ops, int count,
                                                Constraint constraint, const SolverOptions& opts) {
  if (const auto* es = std::get_if<EinsteinSpectrum>(&ops.rep)) {
    return closed_form_pairs(ops, *es, count, constraint);
  }
  const auto& mat = std::get<MatrixOperators>(ops.rep);
  const bool deflate = constraint == Constraint::FirstNonzeroMeanZero;
  const EigenPairs pairs =
      smallest_generalized_eigenpairs(mat.stiffness(), mat.potential, mat.mass, count, deflate, opts);
  std::vector<SpectralResult> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    SpectralResult r;
    r.lambda = pairs.values[k];
    r.f = pairs.vectors.col(k);
    fix_sign(r.f, mat.mass);
    r.residual = pairs.residuals[k];
    r.constraint = constraint;
    r.normalized = std::abs(r.f.dot(mat.mass.cwiseProduct(r.f)) - 1.0) <= 1e-10;
    r.converged = pairs.converged;
    r.iterations = pairs.iterations;
    out.push_back(std::move(r));
  }
  return out;
}

SpectralResult lowest_eigenpair(const DiscreteOperators& ops, const SolverOptions& opts) {
  return smallest_eigenpairs(ops, 1, Constraint::Lowest, opts).front();
}

SpectralResult first_nonzero_eigenpair(const MetricState& state, const SolverOptions& opts) {
  const auto ops = build_operators(state, 0.0);
  return smallest_eigenpairs(ops, 1, Constraint::FirstNonzeroMeanZero, opts).front();
}

double rayleigh_quotient(const DiscreteOperators& ops, const Eigen::VectorXd& f) {
  if (f.size() == 0 || f.isZero(0.0)) throw DomainError("rayleigh_quotient: zero vector");
  if (std::holds_alternative<EinsteinSpectrum>(ops.rep)) {
    // Closed-form path only evaluates constant functions.
    if (f.size() != 1) throw DimensionMismatch("closed-form Rayleigh quotient takes a constant");
    return ops.c * ops.R[0];
  }
  const auto& mat = std::get<MatrixOperators>(ops.rep);
  if (f.size() != mat.mass.size()) throw DimensionMismatch("rayleigh_quotient: size mismatch");
  const double energy = mat.geometry->dirichlet_form(f, f) + f.dot(mat.potential.cwiseProduct(f));
  return energy / f.dot(mat.mass.cwiseProduct(f));
}

ContinuityAudit continuity_ratio_check(const MetricState& state1, const MetricState& state2,
                                       double eps, double c, const SolverOptions& opts) {
  if (state1.family.kind != state2.family.kind || field_size(state1) != field_size(state2)) {
    throw DimensionMismatch("continuity check needs states on a shared discretization");
  }
  if (!(eps >= 0.0)) throw DomainError("continuity check: eps must be >= 0");
  const int n = state1.family.n;
  ContinuityAudit audit;
  audit.eps = eps;
  audit.lower = std::pow(1.0 + eps, -(n + 1));
  audit.upper = std::pow(1.0 + eps, n + 1);

  if (const auto* e1 = std::get_if<EinsteinScale>(&state1.dof)) {
    audit.metric_gap = 0.5 * std::abs(std::log(std::get<EinsteinScale>(state2.dof).s / e1->s));
  } else {
    const auto& u1 = std::get<ConformalFactor>(state1.dof).u;
    const auto& u2 = std::get<ConformalFactor>(state2.dof).u;
    audit.metric_gap = (u2 - u1).cwiseAbs().maxCoeff();
  }
  // (1+eps)^{-1} g1 <= g2 <= (1+eps) g1, with rounding slack at equality.
  const double allowed = 0.5 * std::log1p(eps);
  if (audit.metric_gap > allowed * (1.0 + 1e-12) + 1e-15) return audit;

  const double l1a = first_nonzero_eigenpair(state1, opts).lambda;
  const double l1b = first_nonzero_eigenpair(state2, opts).lambda;
  audit.lambda1_ratio = l1a / l1b;
  const double slack = 1e-12;
  audit.lambda1_status = (audit.lambda1_ratio >= audit.lower * (1.0 - slack) &&
                          audit.lambda1_ratio <= audit.upper * (1.0 + slack))
                             ? CheckStatus::Pass
                             : CheckStatus::Fail;

  const auto rep1 = curvature_report(state1);
  const auto rep2 = curvature_report(state2);
  audit.curvature_gap = (rep2.R - rep1.R).cwiseAbs().maxCoeff();
  if (audit.curvature_gap > eps) return audit;

  const double l0a = lowest_eigenpair(build_operators(state1, c), opts).lambda;
  const double l0b = lowest_eigenpair(build_operators(state2, c), opts).lambda;
  const double half = 0.5 * n;
  const double q = 1.0 + eps;
  audit.lambda0_diff = l0b - l0a;
  audit.lambda0_bound =
      (std::pow(q, half + 1.0) - std::pow(q, -half)) * std::pow(q, half) *
          (l0a - std::abs(c) * rep1.R_min) +
      std::abs(c) * audit.curvature_gap * std::pow(q, half);
  audit.lambda0_status =
      audit.lambda0_diff <= audit.lambda0_bound ? CheckStatus::Pass : CheckStatus::Flagged;
  return audit;
}

}  // namespace rbflow
