#pragma once

#include "spilqr/matrix_ops.hpp"
#include "spilqr/regularizers.hpp"

namespace spilqr {

/// Discrete-time plant x_{t+1} = A x_t + B u_t with stage cost
/// x^T Q x + u^T R u and initial-state covariance Sigma0.
///
/// The constructor validates shapes, Q symmetric PSD, R symmetric PD and
/// Sigma0 symmetric PD.
struct Plant {
  Matrix A, B, Q, R, Sigma0;

  Plant(Matrix A_in, Matrix B_in, Matrix Q_in, Matrix R_in, Matrix Sigma0_in);

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
};

/// Static state-feedback gain, u = K x.
struct Policy {
  Matrix K;
};

/// Cached policy-evaluation artifacts: value matrix P, state covariance
/// Sigma and the smooth cost f = Tr(Sigma0 P).
struct Evaluation {
  Matrix P;
  Matrix Sigma;
  double f = 0.0;
};

/// Regularized design problem: minimize f(K) + lambda r(K).
struct RegularizedProblem {
  Plant plant;
  Regularizer reg;
  double lambda = 0.0;

  RegularizedProblem(Plant plant_in, Regularizer reg_in, double lambda_in);
};

/// True when spectral_radius(A + B K) < 1.
bool is_stabilizing(const Plant& plant, const Policy& policy);

/// Solves the two closed-loop fixed-point equations
///   (A+BK)^T P (A+BK) - P + Q + K^T R K = 0
///   (A+BK) Sigma (A+BK)^T - Sigma + Sigma0 = 0
/// and returns them with f = Tr(Sigma0 P). Throws InstabilityError for a
/// non-stabilizing policy.
Evaluation evaluate_policy(const Plant& plant, const Policy& policy);

/// Gradient of the smooth cost, 2((R + B^T P B) K + B^T P A) Sigma.
Matrix policy_gradient(const Plant& plant, const Policy& policy, const Evaluation& eval);

/// F(K) = f(K) + lambda r(K); +inf whenever a constraint regularizer is
/// violated, regardless of lambda.
double objective(const RegularizedProblem& problem, const Policy& policy,
                 const Evaluation& eval);

}  // namespace spilqr
