#include "spilqr/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spilqr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft(double g, double w) {
  return std::copysign(std::max(std::abs(g) - w, 0.0), g);
}

// Flattened row-major view of an entry.
double& entry_at(Matrix& M, int flat) {
  return M(flat / M.cols(), flat % M.cols());
}

void check_groups(const GroupLasso& gl, const Matrix& K) {
  const int total = static_cast<int>(K.size());
  std::vector<char> seen(total, 0);
  for (const auto& g : gl.groups) {
    for (int idx : g) {
      if (idx < 0 || idx >= total)
        throw DomainError("group index " + std::to_string(idx) + " out of range");
      if (seen[idx]) throw DomainError("group index " + std::to_string(idx) + " repeated");
      seen[idx] = 1;
    }
  }
}

double group_norm(const Matrix& K, const std::vector<int>& g) {
  double ss = 0.0;
  for (int idx : g) {
    const double v = K(idx / K.cols(), idx % K.cols());
    ss += v * v;
  }
  return std::sqrt(ss);
}

// Projection onto the standard simplex over all entries: (g_i - tau)_+ with
// tau chosen by bisection so the entries sum to one.
Matrix project_simplex(const Matrix& G, double w) {
  const double n_entries = static_cast<double>(G.size());
  double lo = G.minCoeff() - std::max(w * n_entries, 1.0);
  double hi = G.maxCoeff();
  auto mass = [&](double tau) { return (G.array() - tau).max(0.0).sum(); };
  if (mass(lo) < 1.0 || mass(hi) > 1.0)
    throw NumericalError("simplex bisection failed to bracket");
  for (int it = 0; it < 300 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) >= 1.0)
      lo = mid;
    else
      hi = mid;
    if (std::abs(mass(lo) - 1.0) <= kSimplexBisectTol) break;
  }
  return (G.array() - lo).max(0.0).matrix();
}

}  // namespace

double penalty_value(const Matrix& K, const Regularizer& reg) {
  if (!K.allFinite()) throw DomainError("penalty input has non-finite entries");
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Lasso>) {
          return K.cwiseAbs().sum();
        } else if constexpr (std::is_same_v<T, GroupLasso>) {
          check_groups(r, K);
          double total = 0.0;
          for (const auto& g : r.groups) total += group_norm(K, g);
          return total;
        } else if constexpr (std::is_same_v<T, Nuclear>) {
          return svd(K).singular_values.sum();
        } else if constexpr (std::is_same_v<T, ElasticNet>) {
          return r.lambda1 * K.cwiseAbs().sum() + r.lambda2 * K.squaredNorm();
        } else if constexpr (std::is_same_v<T, FrobToRef>) {
          if (r.K_ref.rows() != K.rows() || r.K_ref.cols() != K.cols())
            throw DimensionError("K_ref shape does not match K");
          return (K - r.K_ref).squaredNorm();
        } else if constexpr (std::is_same_v<T, Nonnegative>) {
          return K.minCoeff() >= 0.0 ? 0.0 : kInf;
        } else {
          static_assert(std::is_same_v<T, Simplex>);
          if (K.minCoeff() < 0.0) return kInf;
          return std::abs(K.sum() - 1.0) <= 1e-9 ? 0.0 : kInf;
        }
      },
      reg);
}

Matrix prox(const Matrix& G, const Regularizer& reg, double w) {
  if (!G.allFinite()) throw DomainError("prox input has non-finite entries");
  if (!(w >= 0.0)) throw DomainError("prox weight must be >= 0");
  return std::visit(
      [&](const auto& r) -> Matrix {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Lasso>) {
          return G.unaryExpr([&](double g) { return soft(g, w); });
        } else if constexpr (std::is_same_v<T, GroupLasso>) {
          check_groups(r, G);
          Matrix out = G;
          for (const auto& g : r.groups) {
            const double nrm = group_norm(G, g);
            const double scale = nrm > 0.0 ? std::max(1.0 - w / nrm, 0.0) : 0.0;
            for (int idx : g) entry_at(out, idx) *= scale;
          }
          return out;
        } else if constexpr (std::is_same_v<T, Nuclear>) {
          const SvdResult s = svd(G);
          const Vector shrunk =
              (s.singular_values.array() - w).max(0.0).matrix();
          return s.U * shrunk.asDiagonal() * s.V.transpose();
        } else if constexpr (std::is_same_v<T, ElasticNet>) {
          const double shift = r.lambda1 * w;
          const double denom = r.lambda2 * w + 1.0;
          return G.unaryExpr([&](double g) { return soft(g, shift) / denom; });
        } else if constexpr (std::is_same_v<T, FrobToRef>) {
          if (r.K_ref.rows() != G.rows() || r.K_ref.cols() != G.cols())
            throw DimensionError("K_ref shape does not match G");
          return (2.0 * w * r.K_ref + G) / (2.0 * w + 1.0);
        } else if constexpr (std::is_same_v<T, Nonnegative>) {
          return G.cwiseMax(0.0);
        } else {
          static_assert(std::is_same_v<T, Simplex>);
          return project_simplex(G, w);
        }
      },
      reg);
}

const char* regularizer_name(const Regularizer& reg) {
  return std::visit(
      [](const auto& r) -> const char* {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Lasso>) return "lasso";
        else if constexpr (std::is_same_v<T, GroupLasso>) return "group-lasso";
        else if constexpr (std::is_same_v<T, Nuclear>) return "nuclear";
        else if constexpr (std::is_same_v<T, ElasticNet>) return "elastic-net";
        else if constexpr (std::is_same_v<T, FrobToRef>) return "frob-to-ref";
        else if constexpr (std::is_same_v<T, Nonnegative>) return "nonnegative";
        else return "simplex";
      },
      reg);
}

}  // namespace spilqr
