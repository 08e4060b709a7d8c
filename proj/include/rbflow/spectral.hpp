#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rbflow/eigensolver.hpp"
#include "rbflow/families.hpp"

namespace rbflow {

// Round sphere of scale s: spectrum of -Delta is k(k+n-1)/s.
struct EinsteinSpectrum {
  int n;
  double s;
};

// -Delta + cR on a conformal 2-D state as the pencil (S + diag(potential), diag(mass)).
// S is the base stiffness: the Dirichlet energy is conformally invariant in 2-D.
struct MatrixOperators {
  std::shared_ptr<const BaseGeometry> geometry;
  Eigen::VectorXd mass;       // base mass * e^{2u}
  Eigen::VectorXd potential;  // c * R * mass

  [[nodiscard]] const Eigen::SparseMatrix<double>& stiffness() const { return geometry->stiffness; }
};

struct DiscreteOperators {
  double c = 0.0;
  Eigen::VectorXd R;  // scalar curvature used for the potential
  std::variant<EinsteinSpectrum, MatrixOperators> rep;

  [[nodiscard]] bool closed_form() const { return std::holds_alternative<EinsteinSpectrum>(rep); }
};

enum class Constraint { Lowest, FirstNonzeroMeanZero };

struct SpectralResult {
  double lambda = 0.0;
  // Eigenfunction with f^T M_g f = 1. Closed-form results carry a single
  // value for the constant eigenfunction, or nothing for a spherical harmonic.
  Eigen::VectorXd f;
  double residual = 0.0;
  Constraint constraint = Constraint::Lowest;
  bool normalized = false;
  bool closed_form = false;
  bool converged = false;
  int iterations = 0;
};

// Throws UnsupportedFamily for SU(2) states.
DiscreteOperators build_operators(const MetricState& state, double c);

SpectralResult lowest_eigenpair(const DiscreteOperators& ops, const SolverOptions& opts = {});
SpectralResult first_nonzero_eigenpair(const MetricState& state, const SolverOptions& opts = {});

// Smallest `count` eigenpairs under the given constraint, ascending.
std::vector<SpectralResult> smallest_eigenpairs(const DiscreteOperators& ops, int count,
                                                Constraint constraint,
                                                const SolverOptions& opts = {});

// (f^T S f + f^T P f) / (f^T M f). Throws DomainError for f = 0.
double rayleigh_quotient(const DiscreteOperators& ops, const Eigen::VectorXd& f);

enum class CheckStatus { Pass, Fail, HypothesisNotMet, Flagged };
std::string to_string(CheckStatus status);

struct ContinuityAudit {
  double eps = 0.0;
  double metric_gap = 0.0;       // max |u2 - u1| (or |ln(s2/s1)|/2)
  CheckStatus lambda1_status = CheckStatus::HypothesisNotMet;
  double lambda1_ratio = 0.0;    // lambda1(g1) / lambda1(g2)
  double lower = 0.0;
  double upper = 0.0;
  // lambda0 comparison; Flagged means the observed difference exceeds the
  // part of the bound evaluable with delta = 0.
  CheckStatus lambda0_status = CheckStatus::HypothesisNotMet;
  double lambda0_diff = 0.0;
  double lambda0_bound = 0.0;
  double curvature_gap = 0.0;    // max |R2 - R1|
};

ContinuityAudit continuity_ratio_check(const MetricState& state1, const MetricState& state2,
                                       double eps, double c = 0.0,
                                       const SolverOptions& opts = {});

}  // namespace rbflow
