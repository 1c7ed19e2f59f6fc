#pragma once

#include <optional>
#include <vector>

#include "spilqr/lqr.hpp"

namespace spilqr {

/// Floor applied to lambda in the default initial-stepsize rule
/// eta0 = 1 / max(lambda, kLambdaFloor).
inline constexpr double kLambdaFloor = 1e-8;

enum class SolveStatus { kConverged, kMaxIters, kLinesearchFailed, kDiverged };

const char* to_string(SolveStatus status);

struct SpiConfig {
  double beta = 0.5;          // linesearch shrink factor, in (0, 1)
  double eps_tol = 1e-6;      // stop when ||K_{i+1} - K_i||_F <= eps_tol
  int max_iters = 500;        // outer iteration cap
  int max_linesearch = 100;   // shrinks per outer iteration before giving up
  std::optional<double> eta0; // overrides the 1 / max(lambda, floor) rule
};

/// One row of a solve trace. Record 0 describes the initial policy (its
/// eta and grad_map_norm are 0); record i >= 1 describes the iterate after
/// the i-th accepted step, carrying that step's accepted stepsize and
/// gradient-map norm. grad_estimate_norm is filled by the model-free solver
/// only.
struct IterationRecord {
  int iter = 0;
  double objective = 0.0;           // F(K)
  double smooth_cost = 0.0;         // f(K)
  double penalty = 0.0;             // r(K)
  double eta = 0.0;                 // accepted stepsize
  double grad_map_norm = 0.0;       // ||G_eta||_F of the accepted step
  double grad_estimate_norm = 0.0;  // ||ghat||_F (model-free only)
  double spectral_radius = 0.0;     // rho(A + B K)
  int cardinality = 0;
  double elapsed_ms = 0.0;          // cumulative since solve start
};

struct SolveReport {
  Policy final_policy;
  SolveStatus status = SolveStatus::kMaxIters;
  int iterations = 0;  // accepted outer steps
  std::vector<IterationRecord> trace;
};

/// Lower bounds on linesearch-free stepsizes: eta_local is valid near K,
/// eta_global over the F(K^0) sublevel set. Both are diagnostics; the
/// solver never consumes them. The cost factor entering their constants is
/// the smooth cost f(K), which keeps them independent of lambda's
/// contribution to the objective. Without a target estimate the distance
/// bound falls back to Delta = ||K||_F, consistent with treating the
/// target as the origin.
struct StepsizeBounds {
  double eta_local = 0.0;
  double eta_global = 0.0;
};

/// K+ = prox(K - eta grad, reg, lambda * eta).
Policy prox_grad_step(const RegularizedProblem& problem, const Policy& policy,
                      const Matrix& gradient, double eta);

/// G_eta(K) = (K - prox_grad_step(K)) / eta.
Matrix gradient_map(const RegularizedProblem& problem, const Policy& policy,
                    const Matrix& gradient, double eta);

/// Backtracking acceptance test for a trial step K -> K_next at stepsize
/// eta: the trial must be stabilizing and must satisfy the sufficient
/// decrease bound
///   f(K_next) <= f(K) - eta <grad, G> + (eta/2) ||G||_F^2,
/// with G = (K - K_next) / eta and f(K_next) from a fresh solve.
bool linesearch_accepts(const RegularizedProblem& problem, const Policy& policy,
                        const Evaluation& eval, const Matrix& gradient,
                        const Policy& policy_next, double eta);

/// Structured policy iteration with backtracking linesearch. Each outer
/// iteration evaluates the current policy, then shrinks the stepsize from
/// the iteration-independent initial value (first trial beta * eta0) until
/// linesearch_accepts passes. Throws InstabilityError when K0 is not
/// stabilizing.
SolveReport solve(const RegularizedProblem& problem, const Policy& K0,
                  const SpiConfig& config);

/// Proximal gradient iteration at a fixed stepsize, no linesearch. An
/// iterate that leaves the stabilizing set ends the run with
/// status kDiverged recorded rather than thrown.
SolveReport solve_fixed_step(const RegularizedProblem& problem, const Policy& K0,
                             double eta, int max_iters, double eps_tol);

/// Certified stepsize bounds at a stabilizing K. Supported for Lasso,
/// Nuclear and FrobToRef; other variants throw UnsupportedError.
StepsizeBounds stepsize_bound(const RegularizedProblem& problem, const Policy& policy,
                              const Evaluation& eval,
                              const std::optional<Matrix>& K_star_estimate = {});

}  // namespace spilqr
