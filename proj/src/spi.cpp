#include "spilqr/spi.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>

namespace spilqr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double initial_eta(const RegularizedProblem& problem, const SpiConfig& config) {
  if (config.eta0) {
    if (!(*config.eta0 > 0.0)) throw DomainError("eta0 must be > 0");
    return *config.eta0;
  }
  return 1.0 / std::max(problem.lambda, kLambdaFloor);
}

IterationRecord make_record(const RegularizedProblem& problem, int iter,
                            const Policy& policy, const Evaluation& eval,
                            Clock::time_point t0) {
  IterationRecord rec;
  rec.iter = iter;
  rec.smooth_cost = eval.f;
  rec.penalty = penalty_value(policy.K, problem.reg);
  rec.objective = std::isinf(rec.penalty)
                      ? rec.penalty
                      : eval.f + problem.lambda * rec.penalty;
  rec.spectral_radius = spectral_radius(problem.plant.A + problem.plant.B * policy.K);
  rec.cardinality = cardinality(policy.K);
  rec.elapsed_ms = ms_since(t0);
  return rec;
}

// Sufficient decrease test of the backtracking rule, given f at the trial.
bool descent_holds(double f_next, double f_cur, const Matrix& gradient,
                   const Matrix& K_cur, const Matrix& K_next, double eta) {
  const Matrix G = (K_cur - K_next) / eta;
  const double rhs =
      f_cur - eta * (gradient.transpose() * G).trace() + 0.5 * eta * G.squaredNorm();
  return f_next <= rhs;
}

// Operator 2-norm.
double norm2(const Matrix& M) {
  if (M.rows() == 1 || M.cols() == 1) return M.norm();
  return M.operatorNorm();
}

double min_eigenvalue(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed in stepsize bound");
  return es.eigenvalues().minCoeff();
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIters: return "max_iters";
    case SolveStatus::kLinesearchFailed: return "linesearch_failed";
    case SolveStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

Policy prox_grad_step(const RegularizedProblem& problem, const Policy& policy,
                      const Matrix& gradient, double eta) {
  if (!(eta > 0.0)) throw DomainError("stepsize must be > 0");
  if (gradient.rows() != policy.K.rows() || gradient.cols() != policy.K.cols())
    throw DimensionError("gradient shape does not match K");
  return Policy{prox(policy.K - eta * gradient, problem.reg, problem.lambda * eta)};
}

Matrix gradient_map(const RegularizedProblem& problem, const Policy& policy,
                    const Matrix& gradient, double eta) {
  return (policy.K - prox_grad_step(problem, policy, gradient, eta).K) / eta;
}

bool linesearch_accepts(const RegularizedProblem& problem, const Policy& policy,
                        const Evaluation& eval, const Matrix& gradient,
                        const Policy& policy_next, double eta) {
  if (!(eta > 0.0)) throw DomainError("stepsize must be > 0");
  if (!is_stabilizing(problem.plant, policy_next)) return false;
  const Evaluation eval_next = evaluate_policy(problem.plant, policy_next);
  return descent_holds(eval_next.f, eval.f, gradient, policy.K, policy_next.K, eta);
}

SolveReport solve(const RegularizedProblem& problem, const Policy& K0,
                  const SpiConfig& config) {
  if (!(config.beta > 0.0 && config.beta < 1.0))
    throw DomainError("beta must lie in (0, 1)");
  if (!(config.eps_tol > 0.0)) throw DomainError("eps_tol must be > 0");
  if (!is_stabilizing(problem.plant, K0))
    throw InstabilityError("initial policy is not stabilizing");

  const auto t0 = Clock::now();
  const double eta0 = initial_eta(problem, config);

  SolveReport report;
  report.final_policy = K0;
  report.status = SolveStatus::kMaxIters;

  Policy K = K0;
  Evaluation eval = evaluate_policy(problem.plant, K);
  report.trace.push_back(make_record(problem, 0, K, eval, t0));

  for (int i = 0; i < config.max_iters; ++i) {
    const Matrix grad = policy_gradient(problem.plant, K, eval);

    double eta = eta0;
    bool accepted = false;
    Policy K_next;
    Evaluation eval_next;
    for (int ls = 0; ls < config.max_linesearch; ++ls) {
      eta *= config.beta;
      K_next = prox_grad_step(problem, K, grad, eta);
      if (!is_stabilizing(problem.plant, K_next)) continue;
      eval_next = evaluate_policy(problem.plant, K_next);
      if (descent_holds(eval_next.f, eval.f, grad, K.K, K_next.K, eta)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      report.status = SolveStatus::kLinesearchFailed;
      break;
    }

    const double step = (K_next.K - K.K).norm();
    K = K_next;
    eval = eval_next;
    report.iterations = i + 1;

    IterationRecord rec = make_record(problem, i + 1, K, eval, t0);
    rec.eta = eta;
    rec.grad_map_norm = step / eta;
    report.trace.push_back(rec);

    if (step <= config.eps_tol) {
      report.status = SolveStatus::kConverged;
      break;
    }
  }

  report.final_policy = K;
  return report;
}

SolveReport solve_fixed_step(const RegularizedProblem& problem, const Policy& K0,
                             double eta, int max_iters, double eps_tol) {
  if (!(eta > 0.0)) throw DomainError("stepsize must be > 0");
  if (!is_stabilizing(problem.plant, K0))
    throw InstabilityError("initial policy is not stabilizing");

  const auto t0 = Clock::now();
  SolveReport report;
  report.status = SolveStatus::kMaxIters;

  Policy K = K0;
  Evaluation eval = evaluate_policy(problem.plant, K);
  report.trace.push_back(make_record(problem, 0, K, eval, t0));

  for (int i = 0; i < max_iters; ++i) {
    const Matrix grad = policy_gradient(problem.plant, K, eval);
    const Policy K_next = prox_grad_step(problem, K, grad, eta);
    if (!is_stabilizing(problem.plant, K_next)) {
      report.status = SolveStatus::kDiverged;
      break;
    }
    const double step = (K_next.K - K.K).norm();
    K = K_next;
    eval = evaluate_policy(problem.plant, K);
    report.iterations = i + 1;

    IterationRecord rec = make_record(problem, i + 1, K, eval, t0);
    rec.eta = eta;
    rec.grad_map_norm = step / eta;
    report.trace.push_back(rec);

    if (step <= eps_tol) {
      report.status = SolveStatus::kConverged;
      break;
    }
  }

  report.final_policy = K;
  return report;
}

StepsizeBounds stepsize_bound(const RegularizedProblem& problem, const Policy& policy,
                              const Evaluation& eval,
                              const std::optional<Matrix>& K_star_estimate) {
  const Plant& plant = problem.plant;
  const double n = static_cast<double>(plant.n());
  const double m = static_cast<double>(plant.m());
  const double lambda = problem.lambda;

  const double sigma_min_Sigma0 = min_eigenvalue(plant.Sigma0);
  const double sigma_min_Q = min_eigenvalue(plant.Q);
  const double norm_B = norm2(plant.B);
  const double norm_A = norm2(plant.A);
  const double norm_R = norm2(plant.R);
  const double norm_Sigma = norm2(eval.Sigma);
  const double norm_closed = norm2(plant.A + plant.B * policy.K);
  const Matrix grad = policy_gradient(plant, policy, eval);
  const double norm_grad = norm2(grad);

  const double delta = K_star_estimate ? (policy.K - *K_star_estimate).norm()
                                       : policy.K.norm();
  const double norm_K_star = K_star_estimate ? K_star_estimate->norm() : 0.0;

  // Perturbation constant of the gradient dominates both bounds.
  const double rho_K =
      sigma_min_Sigma0 / (4.0 * norm_Sigma * (norm_closed + 1.0) * norm_B);

  const double f0 = eval.f;
  const double p_bound = f0 / sigma_min_Sigma0;  // ||P|| on the sublevel set
  const double rho_f = 2.0 * (f0 / sigma_min_Q) *
                       (norm_B * p_bound * norm_A +
                        (norm_R + norm_B * p_bound * norm_B) * (delta + norm_K_star));
  const double rho_L =
      sigma_min_Sigma0 * sigma_min_Sigma0 / (8.0 * f0 * norm_B);

  StepsizeBounds out;
  if (std::holds_alternative<Lasso>(problem.reg)) {
    out.eta_local = rho_K / (norm_grad + lambda * n * m);
    out.eta_global = rho_L / (rho_f + lambda * n * m);
  } else if (std::holds_alternative<Nuclear>(problem.reg)) {
    const double mn = std::min(n, m);
    out.eta_local = rho_K / (norm_grad + lambda * mn);
    out.eta_global = rho_L / (rho_f + lambda * mn);
  } else if (const auto* fr = std::get_if<FrobToRef>(&problem.reg)) {
    out.eta_local =
        rho_K / (2.0 * norm_grad + 2.0 * lambda * (policy.K - fr->K_ref).norm());
    out.eta_global = rho_L / (2.0 * rho_f + 4.0 * lambda * delta);
  } else {
    throw UnsupportedError(std::string("no certified stepsize bound for ") +
                           regularizer_name(problem.reg));
  }
  return out;
}

}  // namespace spilqr
