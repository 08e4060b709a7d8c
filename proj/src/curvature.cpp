#include "rbflow/curvature.hpp"

#include <algorithm>
#include <cmath>

#include "rbflow/error.hpp"

namespace rbflow {

std::array<double, 3> milnor_ricci_eigenvalues(const Su2Triple& m) {
  const double ra = 2.0 * (m.a * m.a - (m.b - m.c) * (m.b - m.c)) / (m.b * m.c);
  const double rb = 2.0 * (m.b * m.b - (m.c - m.a) * (m.c - m.a)) / (m.c * m.a);
  const double rc = 2.0 * (m.c * m.c - (m.a - m.b) * (m.a - m.b)) / (m.a * m.b);
  return {ra / m.a, rb / m.b, rc / m.c};
}

std::array<double, 3> milnor_sectional_curvatures(const Su2Triple& m) {
  const auto rho = milnor_ricci_eigenvalues(m);
  const double R = rho[0] + rho[1] + rho[2];
  return {R / 2.0 - rho[0], R / 2.0 - rho[1], R / 2.0 - rho[2]};
}

Eigen::VectorXd laplace_beltrami(const MetricState& state, const Eigen::VectorXd& field) {
  const auto* cf = std::get_if<ConformalFactor>(&state.dof);
  if (!cf) throw UnsupportedFamily("laplace_beltrami needs a conformal state");
  const auto& geo = state.base();
  if (field.size() != geo.size()) throw DimensionMismatch("laplace_beltrami: size mismatch");
  const Eigen::VectorXd base_lap = -(geo.stiffness * field).cwiseQuotient(geo.mass);
  return (-2.0 * cf->u).array().exp().matrix().cwiseProduct(base_lap);
}

CurvatureReport curvature_report(const MetricState& state) {
  validate(state);
  CurvatureReport rep;
  const int n = state.family.n;
  if (const auto* e = std::get_if<EinsteinScale>(&state.dof)) {
    const double lambda = (n - 1) / e->s;
    const double R = n * lambda;
    rep.R = Eigen::VectorXd::Constant(1, R);
    rep.ric = EinsteinRicci{lambda};
    rep.ric_norm_sq = Eigen::VectorXd::Constant(1, n * lambda * lambda);
    rep.ric_min_eigen = Eigen::VectorXd::Constant(1, lambda);
    rep.riem_mag = std::abs(R);
  } else if (const auto* m = std::get_if<Su2Triple>(&state.dof)) {
    const auto rho = milnor_ricci_eigenvalues(*m);
    const double R = rho[0] + rho[1] + rho[2];
    rep.R = Eigen::VectorXd::Constant(1, R);
    rep.ric = MilnorRicci{rho[0] * m->a, rho[1] * m->b, rho[2] * m->c};
    rep.ric_norm_sq =
        Eigen::VectorXd::Constant(1, rho[0] * rho[0] + rho[1] * rho[1] + rho[2] * rho[2]);
    rep.ric_min_eigen = Eigen::VectorXd::Constant(1, std::min({rho[0], rho[1], rho[2]}));
    const auto K = milnor_sectional_curvatures(*m);
    rep.riem_mag = std::max({std::abs(K[0]), std::abs(K[1]), std::abs(K[2])});
  } else {
    const auto& geo = state.base();
    const auto& u = std::get<ConformalFactor>(state.dof).u;
    // R = e^{-2u} (R0 - 2 Delta_0 u), Delta_0 = -M^{-1} S.
    const Eigen::VectorXd base_term = geo.R0 + 2.0 * (geo.stiffness * u).cwiseQuotient(geo.mass);
    rep.R = (-2.0 * u).array().exp().matrix().cwiseProduct(base_term);
    rep.ric = ConformalRicci{};
    rep.ric_norm_sq = 0.5 * rep.R.cwiseProduct(rep.R);
    rep.ric_min_eigen = 0.5 * rep.R;
    rep.riem_mag = rep.R.cwiseAbs().maxCoeff();
  }
  rep.R_min = rep.R.minCoeff();
  rep.R_max = rep.R.maxCoeff();
  if (rep.R_min > 0.0) {
    rep.pinch = rep.ric_min_eigen.cwiseQuotient(rep.R).minCoeff();
  }
  if (!rep.R.allFinite()) throw NumericError("non-finite scalar curvature");
  return rep;
}

double einstein_pinching_deficit(const CurvatureReport& report, double rho, double a, int n) {
  const double coef = (1.0 + (2 - n) * rho) / 2.0;
  if (std::holds_alternative<ConformalRicci>(report.ric) && n == 2) {
    // Ric - R/2 g vanishes identically; only a survives.
    return a;
  }
  return (report.ric_min_eigen - coef * report.R).minCoeff() + a;
}

}  // namespace rbflow
