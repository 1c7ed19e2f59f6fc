#pragma once

#include <variant>
#include <vector>

#include "spilqr/matrix_ops.hpp"

namespace spilqr {

/// Entrywise l1 norm.
struct Lasso {};

/// Sum of blockwise l2 norms over disjoint groups of entries. Each group is
/// a set of flattened row-major indices (i * cols + j); entries not covered
/// by any group are unpenalized and pass through the prox unchanged.
struct GroupLasso {
  std::vector<std::vector<int>> groups;
};

/// Sum of singular values.
struct Nuclear {};

/// lambda1 * ||K||_1 + lambda2 * ||K||_F^2 with its own embedded weights;
/// an outer lambda multiplies both.
struct ElasticNet {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Squared Frobenius distance to a reference gain, ||K - K_ref||_F^2.
struct FrobToRef {
  Matrix K_ref;
};

/// Indicator of the nonnegative orthant.
struct Nonnegative {};

/// Indicator of the standard simplex over all entries (entries >= 0,
/// summing to 1).
struct Simplex {};

using Regularizer =
    std::variant<Lasso, GroupLasso, Nuclear, ElasticNet, FrobToRef, Nonnegative, Simplex>;

/// Tolerance on the simplex sum constraint enforced by the prox bisection.
inline constexpr double kSimplexBisectTol = 1e-12;

/// r(K). Constraint variants return 0 when satisfied and +inf otherwise
/// (nonnegativity exactly, the simplex sum within 1e-9).
double penalty_value(const Matrix& K, const Regularizer& reg);

/// prox_{r,w}(G) = argmin_K r(K) + (1/(2w)) ||K - G||_F^2, evaluated in
/// closed form per variant. For the constraint variants the weight is
/// irrelevant and the prox is the Euclidean projection, defined for w = 0
/// as well. ElasticNet applies its soft threshold and shrink with the
/// incoming weight standing in for the stepsize, so its closed form matches
/// r~(K) = lambda1 ||K||_1 + (lambda2 / 2) ||K||_F^2.
///
/// Throws DomainError for w < 0, non-finite G, or malformed groups.
Matrix prox(const Matrix& G, const Regularizer& reg, double w);

/// Human-readable variant name, e.g. "lasso".
const char* regularizer_name(const Regularizer& reg);

}  // namespace spilqr
