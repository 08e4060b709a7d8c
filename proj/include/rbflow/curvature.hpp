#pragma once

#include <array>
#include <optional>
#include <variant>

#include <Eigen/Core>

#include "rbflow/families.hpp"

namespace rbflow {

// Ric = lambda * g.
struct EinsteinRicci {
  double lambda;
};
// Ric = (R/2) g, the only possibility in dimension 2.
struct ConformalRicci {};
// Ricci in the Milnor coordinate frame X_a, X_b, X_c with g = diag(a, b, c).
// Eigenvalues relative to g are r_a/a, r_b/b, r_c/c.
struct MilnorRicci {
  double ra;
  double rb;
  double rc;
};

using RicciRepresentation = std::variant<EinsteinRicci, ConformalRicci, MilnorRicci>;

struct CurvatureReport {
  Eigen::VectorXd R;            // per vertex, or size 1 for homogeneous families
  RicciRepresentation ric;
  Eigen::VectorXd ric_norm_sq;  // |Ric|^2, same layout as R
  // Smallest eigenvalue of Ric relative to g, same layout as R.
  Eigen::VectorXd ric_min_eigen;
  double R_min = 0.0;
  double R_max = 0.0;
  std::optional<double> pinch;  // min relative Ricci eigenvalue / R, only when R_min > 0
  double riem_mag = 0.0;
};

CurvatureReport curvature_report(const MetricState& state);

// Relative eigenvalues (r_a/a, r_b/b, r_c/c) of the Milnor-frame Ricci tensor.
std::array<double, 3> milnor_ricci_eigenvalues(const Su2Triple& m);
// Sectional curvatures of the coordinate planes (bc, ca, ab); in dimension 3
// they are the eigenvalues of the curvature operator for a Milnor frame.
std::array<double, 3> milnor_sectional_curvatures(const Su2Triple& m);

// Delta_g applied to a per-vertex field on a conformal state: e^{-2u} Delta_0.
Eigen::VectorXd laplace_beltrami(const MetricState& state, const Eigen::VectorXd& field);

// min over points and directions of ric_eigen - ((1 + (2-n) rho)/2) R + a.
double einstein_pinching_deficit(const CurvatureReport& report, double rho, double a, int n);

}  // namespace rbflow
