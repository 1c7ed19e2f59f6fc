#include "spilqr/lqr.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <utility>

namespace spilqr {

namespace {

void check_pd(const Matrix& M, const char* name) {
  if (!is_symmetric(M)) throw DomainError(std::string(name) + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed validating " + std::string(name));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw DomainError(std::string(name) + " must be positive definite");
}

}  // namespace

Plant::Plant(Matrix A_in, Matrix B_in, Matrix Q_in, Matrix R_in, Matrix Sigma0_in)
    : A(std::move(A_in)),
      B(std::move(B_in)),
      Q(std::move(Q_in)),
      R(std::move(R_in)),
      Sigma0(std::move(Sigma0_in)) {
  check_square_finite(A, "A");
  if (!B.allFinite()) throw DomainError("B has non-finite entries");
  if (B.rows() != A.rows())
    throw DimensionError("B must have as many rows as A");
  if (B.cols() < 1) throw DimensionError("B must have at least one column");
  check_square_finite(Q, "Q");
  check_square_finite(R, "R");
  check_square_finite(Sigma0, "Sigma0");
  if (Q.rows() != n() || Sigma0.rows() != n() || R.rows() != m())
    throw DimensionError("Q and Sigma0 must be n x n, R must be m x m");
  if (!is_psd(Q)) throw DomainError("Q must be symmetric PSD");
  check_pd(R, "R");
  check_pd(Sigma0, "Sigma0");
}

RegularizedProblem::RegularizedProblem(Plant plant_in, Regularizer reg_in, double lambda_in)
    : plant(std::move(plant_in)), reg(std::move(reg_in)), lambda(lambda_in) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw DomainError("lambda must be finite and >= 0");
  if (const auto* fr = std::get_if<FrobToRef>(&reg)) {
    if (fr->K_ref.rows() != plant.m() || fr->K_ref.cols() != plant.n())
      throw DimensionError("K_ref must be m x n");
  }
}

bool is_stabilizing(const Plant& plant, const Policy& policy) {
  if (policy.K.rows() != plant.m() || policy.K.cols() != plant.n())
    throw DimensionError("K must be m x n");
  if (!policy.K.allFinite()) return false;
  return spectral_radius(plant.A + plant.B * policy.K) < 1.0;
}

Evaluation evaluate_policy(const Plant& plant, const Policy& policy) {
  if (policy.K.rows() != plant.m() || policy.K.cols() != plant.n())
    throw DimensionError("K must be m x n");
  if (!policy.K.allFinite()) throw DomainError("K has non-finite entries");
  const Matrix closed = plant.A + plant.B * policy.K;
  const Matrix cost = plant.Q + policy.K.transpose() * plant.R * policy.K;
  Evaluation eval;
  eval.P = solve_discrete_lyapunov(closed, 0.5 * (cost + cost.transpose()));
  eval.Sigma = solve_discrete_lyapunov(closed.transpose(), plant.Sigma0);
  eval.f = (plant.Sigma0 * eval.P).trace();
  return eval;
}

Matrix policy_gradient(const Plant& plant, const Policy& policy, const Evaluation& eval) {
  const Matrix BtP = plant.B.transpose() * eval.P;
  return 2.0 * ((plant.R + BtP * plant.B) * policy.K + BtP * plant.A) * eval.Sigma;
}

double objective(const RegularizedProblem& problem, const Policy& policy,
                 const Evaluation& eval) {
  const double pen = penalty_value(policy.K, problem.reg);
  if (std::isinf(pen)) return std::numeric_limits<double>::infinity();
  return eval.f + problem.lambda * pen;
}

}  // namespace spilqr
