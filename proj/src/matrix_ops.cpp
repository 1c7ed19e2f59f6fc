#include "spilqr/matrix_ops.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace spilqr {

namespace {

std::string shape_of(const Matrix& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

// Residual of the value-form equation, relative to max(1, ||X||_F).
double lyapunov_residual(const Matrix& M, const Matrix& C, const Matrix& X) {
  const double res = (M.transpose() * X * M - X + C).norm();
  return res / std::max(1.0, X.norm());
}

Matrix solve_lyapunov_direct(const Matrix& M, const Matrix& C) {
  const Eigen::Index n = M.rows();
  const Eigen::Index nn = n * n;
  // vec(M^T X M) = (M^T (x) M^T) vec(X), so (M^T (x) M^T - I) vec(X) = -vec(C).
  Matrix T(nn, nn);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      T.block(i * n, j * n, n, n) = M(j, i) * M.transpose();
  T -= Matrix::Identity(nn, nn);
  Eigen::Map<const Vector> c(C.data(), nn);
  Vector x = Eigen::PartialPivLU<Matrix>(T).solve(-c);
  return Eigen::Map<Matrix>(x.data(), n, n);
}

Matrix solve_lyapunov_doubling(const Matrix& M, const Matrix& C) {
  Matrix X = C;
  Matrix Mk = M;
  for (int k = 0; k < 200; ++k) {
    const double mk_norm = Mk.operatorNorm();
    if (mk_norm * mk_norm * (X.norm() + C.norm()) <=
        0.01 * kLyapunovResidualTol * std::max(1.0, X.norm()))
      break;
    if (!X.allFinite() || mk_norm > 1e150)
      throw NumericalError("doubling Lyapunov iteration overflowed");
    X = X + Mk.transpose() * X * Mk;
    Mk = Mk * Mk;
  }
  return X;
}

}  // namespace

void check_square_finite(const Matrix& M, const char* name) {
  if (M.rows() != M.cols())
    throw DimensionError(std::string(name) + " must be square, got " + shape_of(M));
  if (!M.allFinite())
    throw DomainError(std::string(name) + " has non-finite entries");
}

bool is_symmetric(const Matrix& M, double tol) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_psd(const Matrix& M, double sym_tol, double eig_tol) {
  if (!is_symmetric(M, sym_tol)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed in PSD check");
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  return lo >= -eig_tol * std::max(1.0, hi);
}

double spectral_radius(const Matrix& M) {
  check_square_finite(M, "matrix");
  if (M.rows() == 0) throw DimensionError("matrix must be nonempty");
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalError("nonsymmetric eigensolver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix solve_discrete_lyapunov(const Matrix& M, const Matrix& C) {
  check_square_finite(M, "M");
  check_square_finite(C, "C");
  if (M.rows() != C.rows())
    throw DimensionError("M and C must have matching sizes, got " + shape_of(M) +
                         " vs " + shape_of(C));
  if (!is_symmetric(C))
    throw DomainError("C must be symmetric");
  const double rho = spectral_radius(M);
  if (rho >= 1.0)
    throw InstabilityError("Lyapunov equation requires spectral radius < 1, got rho=" +
                           std::to_string(rho));

  Matrix X = (M.rows() <= kLyapunovDirectMaxDim) ? solve_lyapunov_direct(M, C)
                                                 : solve_lyapunov_doubling(M, C);
  X = 0.5 * (X + X.transpose()).eval();
  const double rel = lyapunov_residual(M, C, X);
  if (!(rel <= kLyapunovResidualTol))
    throw NumericalError("Lyapunov residual " + std::to_string(rel) +
                         " exceeds tolerance");
  return X;
}

DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R) {
  check_square_finite(A, "A");
  check_square_finite(Q, "Q");
  check_square_finite(R, "R");
  if (!B.allFinite()) throw DomainError("B has non-finite entries");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (B.rows() != n)
    throw DimensionError("B must have as many rows as A");
  if (Q.rows() != n || R.rows() != m)
    throw DimensionError("Q must be n x n and R must be m x m");
  if (!is_psd(Q)) throw DomainError("Q must be symmetric PSD");
  if (!is_symmetric(R)) throw DomainError("R must be symmetric");
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(R, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw DomainError("R must be positive definite");
  }

  Matrix P = Q;
  bool converged = false;
  for (int it = 0; it < kDareMaxIters; ++it) {
    const Matrix BtP = B.transpose() * P;
    const Matrix G = BtP * B + R;
    const Matrix K = -Eigen::LLT<Matrix>(G).solve(BtP * A);
    const Matrix P_next = A.transpose() * P * A + Q + (A.transpose() * BtP.transpose()) * K;
    const double change = (P_next - P).norm();
    P = 0.5 * (P_next + P_next.transpose()).eval();
    if (!P.allFinite())
      throw NonStabilizableError("Riccati iteration diverged");
    if (change <= kDareRelTol * std::max(1.0, P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonStabilizableError("Riccati iteration hit its cap of " +
                               std::to_string(kDareMaxIters) + " iterations");

  const Matrix G = B.transpose() * P * B + R;
  DareSolution sol;
  sol.K_lqr = -Eigen::LLT<Matrix>(G).solve(B.transpose() * P * A);
  sol.P = P;
  const Matrix res = A.transpose() * P * A + Q -
                     A.transpose() * P * B * Eigen::LLT<Matrix>(G).solve(B.transpose() * P * A) -
                     P;
  if (!(res.norm() <= kDareResidualTol * std::max(1.0, P.norm())))
    throw NumericalError("Riccati residual exceeds tolerance");
  return sol;
}

SvdResult svd(const Matrix& M) {
  if (!M.allFinite()) throw DomainError("svd input has non-finite entries");
  if (M.rows() == 0 || M.cols() == 0) throw DimensionError("svd input is empty");
  SvdResult out;
  if (std::min(M.rows(), M.cols()) <= 16) {
    Eigen::JacobiSVD<Matrix> s(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = s.matrixU();
    out.singular_values = s.singularValues();
    out.V = s.matrixV();
  } else {
    Eigen::BDCSVD<Matrix> s(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = s.matrixU();
    out.singular_values = s.singularValues();
    out.V = s.matrixV();
  }
  return out;
}

int cardinality(const Matrix& K) {
  return static_cast<int>((K.cwiseAbs().array() > kCardinalityThreshold).count());
}

}  // namespace spilqr
