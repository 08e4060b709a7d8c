#include "rbflow/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "rbflow/error.hpp"

namespace rbflow {

namespace {

void project_constants(Eigen::MatrixXd& Y, const Eigen::VectorXd& mass) {
  const double total = mass.sum();
  // Y <- Y - 1 (1^T M Y) / (1^T M 1)
  const Eigen::RowVectorXd coef = (mass.transpose() * Y) / total;
  Y.rowwise() -= coef;
}

// Modified Gram-Schmidt in the M inner product, two passes.
void m_orthonormalize(Eigen::MatrixXd& Y, const Eigen::VectorXd& mass, bool deflate,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    for (int attempt = 0; attempt < 3; ++attempt) {
      const double before = std::sqrt(Y.col(j).dot(mass.cwiseProduct(Y.col(j))));
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i < j; ++i) {
          const double proj = Y.col(i).dot(mass.cwiseProduct(Y.col(j)));
          Y.col(j) -= proj * Y.col(i);
        }
      }
      const double norm = std::sqrt(Y.col(j).dot(mass.cwiseProduct(Y.col(j))));
      if (norm > 1e-10 * before && norm > 0.0) {
        Y.col(j) /= norm;
        break;
      }
      // Column collapsed into the span of its predecessors: reseed it.
      for (Eigen::Index r = 0; r < Y.rows(); ++r) Y(r, j) = unif(rng);
      if (deflate) {
        Eigen::MatrixXd col = Y.col(j);
        project_constants(col, mass);
        Y.col(j) = col;
      }
    }
  }
}

}  // namespace

EigenPairs smallest_generalized_eigenpairs(const Eigen::SparseMatrix<double>& S,
                                           const Eigen::VectorXd& potential,
                                           const Eigen::VectorXd& mass, int count,
                                           bool deflate_constants, const SolverOptions& opts) {
  const Eigen::Index N = S.rows();
  if (S.cols() != N || potential.size() != N || mass.size() != N) {
    throw DimensionMismatch("eigensolver: operator sizes disagree");
  }
  if ((mass.array() <= 0.0).any()) throw NumericError("eigensolver: mass must be positive");
  const Eigen::Index available = N - (deflate_constants ? 1 : 0);
  if (count < 1 || count > available) throw DomainError("eigensolver: invalid eigenpair count");

  Eigen::Index block = opts.block > 0 ? opts.block : count + std::max(count, 6);
  block = std::clamp<Eigen::Index>(block, count, available);

  const double lower = potential.cwiseQuotient(mass).minCoeff();
  const double sigma = lower - 1e-2 * (1.0 + std::abs(lower));

  Eigen::SparseMatrix<double> K = S;
  for (Eigen::Index i = 0; i < N; ++i) K.coeffRef(i, i) += potential[i] - sigma * mass[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(K);
  if (factor.info() != Eigen::Success) throw NumericError("eigensolver: factorization failed");

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd X(N, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < N; ++i) X(i, j) = unif(rng);
  }
  if (deflate_constants) project_constants(X, mass);
  m_orthonormalize(X, mass, deflate_constants, rng);

  auto apply_A = [&](const Eigen::MatrixXd& Y) -> Eigen::MatrixXd {
    Eigen::MatrixXd out = S * Y;
    out += potential.asDiagonal() * Y;
    return out;
  };

  EigenPairs result;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd Y = factor.solve(mass.asDiagonal() * X);
    if (factor.info() != Eigen::Success) throw NumericError("eigensolver: solve failed");
    if (deflate_constants) project_constants(Y, mass);
    m_orthonormalize(Y, mass, deflate_constants, rng);

    const Eigen::MatrixXd AY = apply_A(Y);
    Eigen::MatrixXd H = Y.transpose() * AY;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(H);
    if (ritz.info() != Eigen::Success) throw NumericError("eigensolver: Rayleigh-Ritz failed");

    X = Y * ritz.eigenvectors();
    const Eigen::MatrixXd AX = AY * ritz.eigenvectors();
    const Eigen::VectorXd& theta = ritz.eigenvalues();

    result.values = theta.head(count);
    result.vectors = X.leftCols(count);
    result.residuals.resize(count);
    bool done = true;
    for (int k = 0; k < count; ++k) {
      const Eigen::VectorXd Mx = mass.cwiseProduct(X.col(k));
      const double r = (AX.col(k) - theta[k] * Mx).norm() / Mx.norm();
      result.residuals[k] = r;
      if (!(r <= opts.tol * std::max(1.0, std::abs(theta[k])))) done = false;
    }
    result.iterations = it;
    if (done) {
      result.converged = true;
      return result;
    }
  }
  std::ostringstream msg;
  msg << "eigensolver: no convergence after " << opts.max_iter
      << " iterations, residual " << result.residuals.maxCoeff();
  throw NumericError(msg.str());
}

}  // namespace rbflow
