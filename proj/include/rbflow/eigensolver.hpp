#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace rbflow {

struct SolverOptions {
  double tol = 1e-9;       // relative residual, scaled by max(1, |lambda|)
  int max_iter = 10000;
  int block = 0;           // subspace size; 0 picks count + max(count, 6)
  unsigned long seed = 0x5eed;

  bool operator==(const SolverOptions&) const = default;
};

struct EigenPairs {
  Eigen::VectorXd values;      // ascending
  Eigen::MatrixXd vectors;     // M-orthonormal columns
  Eigen::VectorXd residuals;   // ||A x - lambda M x|| / ||M x||
  int iterations = 0;
  bool converged = false;
};

// Smallest `count` eigenpairs of (S + diag(potential)) x = lambda diag(mass) x.
// S must be symmetric positive semidefinite. With deflate_constants, the
// search space is M-orthogonal to the constant vector.
//
// Block inverse iteration on (A - sigma M)^{-1} M with Rayleigh-Ritz
// extraction. The shift sits just below the lower bound min(potential/mass),
// so the factored matrix is positive definite.
EigenPairs smallest_generalized_eigenpairs(const Eigen::SparseMatrix<double>& S,
                                           const Eigen::VectorXd& potential,
                                           const Eigen::VectorXd& mass, int count,
                                           bool deflate_constants, const SolverOptions& opts = {});

}  // namespace rbflow
