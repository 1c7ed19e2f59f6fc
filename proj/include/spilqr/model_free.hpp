#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "spilqr/spi.hpp"

namespace spilqr {

/// Ceiling applied to a rollout cost once the running sum (or state) blows
/// up; such rollouts are flagged as diverged.
inline constexpr double kRolloutCostCeiling = 1e12;

using Rng = std::mt19937_64;

struct ModelFreeConfig {
  int n_traj = 200;          // perturbations per gradient estimate
  int horizon = 50;          // rollout steps, stage costs summed through t = horizon
  double radius = 0.05;      // Frobenius radius of the perturbation sphere
  double eta = 1e-4;         // fixed stepsize
  double eps_tol = 1e-6;     // stop when ||K_{i+1} - K_i||_F <= eps_tol
  int max_iters = 100;
  std::uint64_t seed = 0;
  int threads = 1;           // concurrent rollouts per estimation phase
};

struct TrajectorySample {
  Matrix U;            // perturbation on the radius-r Frobenius sphere
  double f_hat = 0.0;  // truncated rollout cost at K + U
  bool diverged = false;
};

struct RolloutResult {
  double cost = 0.0;
  bool diverged = false;
};

/// Deterministic per-trajectory stream: the same (seed, iteration, trajectory)
/// triple always yields the same generator state, so rollouts can run
/// concurrently without changing results.
Rng make_trajectory_rng(std::uint64_t seed, int iteration, int trajectory);

/// Uniform draw from the Frobenius sphere of the given radius in R^{m x n}
/// (Gaussian fill, then rescale).
Matrix sample_sphere(int m, int n, double radius, Rng& rng);

/// Uniform draw from the sphere of radius sqrt(n), matching Sigma0 = I in
/// expectation.
Vector sample_x0(int n, Rng& rng);

/// Cost of one truncated rollout under u = K x from x0: sum of
/// x^T Q x + u^T R u for t = 0..horizon inclusive. Clamped at
/// kRolloutCostCeiling with the divergence flag set.
RolloutResult rollout_cost(const Plant& plant, const Matrix& K, const Vector& x0,
                           int horizon);

/// Sphere-smoothing estimator (d / (N r^2)) sum_j f_hat^j U^j with d = n m.
/// Throws DomainError for an empty sample list or radius <= 0.
Matrix estimate_gradient(const std::vector<TrajectorySample>& samples, double radius,
                         int m, int n);

/// Model-free structured policy iteration: each iteration estimates the
/// gradient from n_traj perturbed rollouts, then applies one fixed-stepsize
/// proximal gradient step. Oracle-side telemetry (exact F, rho) is recorded
/// in the trace but never used by the update. An iterate that leaves the
/// stabilizing set ends the run with status kDiverged.
SolveReport solve_model_free(const RegularizedProblem& problem, const Policy& K0,
                             const ModelFreeConfig& config);

}  // namespace spilqr
