#pragma once

#include <Eigen/Dense>

#include "spilqr/errors.hpp"

namespace spilqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative residual tolerance for the discrete Lyapunov solvers.
inline constexpr double kLyapunovResidualTol = 1e-10;

/// Largest n handled by the direct Kronecker-vectorization Lyapunov solve;
/// above this the doubling (Smith) iteration takes over.  The direct solve
/// costs O(n^6), so it only wins for very small systems.
inline constexpr int kLyapunovDirectMaxDim = 12;

inline constexpr double kDareRelTol = 1e-12;
inline constexpr int kDareMaxIters = 100000;
inline constexpr double kDareResidualTol = 1e-9;

/// Entries with |K_ij| above this count as structurally nonzero.
inline constexpr double kCardinalityThreshold = 1e-6;

struct DareSolution {
  Matrix P;      // stabilizing solution of the Riccati equation
  Matrix K_lqr;  // optimal gain, u = K_lqr x
};

struct SvdResult {
  Matrix U;
  Vector singular_values;  // nonincreasing, nonnegative
  Matrix V;
};

/// Throws DimensionError unless M is square, DomainError on NaN/Inf entries.
void check_square_finite(const Matrix& M, const char* name);

/// True when max|M - M^T| <= tol * max(1, max|M|).
bool is_symmetric(const Matrix& M, double tol = 1e-12);

/// True when M is symmetric and its smallest eigenvalue is >= -tol relative
/// to the largest magnitude eigenvalue.
bool is_psd(const Matrix& M, double sym_tol = 1e-12, double eig_tol = 1e-10);

/// Largest |eigenvalue| of a square real matrix, via the full nonsymmetric
/// eigendecomposition.
double spectral_radius(const Matrix& M);

/// Solves M^T X M - X + C = 0 for symmetric PSD C and stable M.
///
/// Uses a dense Kronecker-vectorization solve for small n and the doubling
/// iteration X_{k+1} = X_k + M_k^T X_k M_k, M_{k+1} = M_k^2 for larger n.
/// The result is symmetrized and its residual is verified against
/// kLyapunovResidualTol * max(1, ||X||_F).
///
/// Throws InstabilityError when spectral_radius(M) >= 1, DomainError when C
/// is not symmetric, NumericalError when the residual check fails.
Matrix solve_discrete_lyapunov(const Matrix& M, const Matrix& C);

/// Stabilizing solution of P = A^T P A + Q - A^T P B (B^T P B + R)^{-1} B^T P A
/// by Riccati value iteration from P_0 = Q, together with the optimal gain
/// K_lqr = -(B^T P B + R)^{-1} B^T P A.
///
/// Iterates until the relative change drops below kDareRelTol; throws
/// NonStabilizableError if kDareMaxIters is exhausted first and
/// NumericalError if the final residual exceeds kDareResidualTol * max(1, ||P||_F).
DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R);

/// Thin SVD, M = U diag(s) V^T with orthonormal columns in U and V.
SvdResult svd(const Matrix& M);

/// Number of entries with |K_ij| > kCardinalityThreshold.
int cardinality(const Matrix& K);

}  // namespace spilqr
