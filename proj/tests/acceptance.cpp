// Acceptance gate: every release-blocking behavior of the library, one
// criterion per function, one PASS/FAIL line per criterion. Exits nonzero
// if any criterion fails. Runtime budgets are part of each criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "oracles.hpp"
#include "spilqr/bench.hpp"

using namespace spilqr;
using spilqr::bench::make_laplacian;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Policy loose_stabilizer(const Plant& plant) {
  // K = 0.5 I - A puts the closed loop at 0.5 I; valid because B = I for
  // the chain plants used here.
  return Policy{0.5 * Matrix::Identity(plant.n(), plant.n()) - plant.A};
}

// criterion 1: with no penalty the linesearch solver must land on the
// Riccati gain, for the small and the medium chain, inside one second.
bool criterion_1(std::string& detail) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int n : {3, 20}) {
    const Plant plant = make_laplacian(n);
    const DareSolution dare = solve_dare(plant.A, plant.B, plant.Q, plant.R);
    const RegularizedProblem problem(plant, Lasso{}, 0.0);
    SpiConfig cfg;
    cfg.eps_tol = 1e-8;
    const SolveReport report = solve(problem, loose_stabilizer(plant), cfg);
    if (report.status != SolveStatus::kConverged) {
      detail = "n=" + std::to_string(n) + " did not converge";
      return false;
    }
    worst = std::max(worst, (report.final_policy.K - dare.K_lqr).norm());
  }
  const double secs = seconds_since(t0);
  detail = "max gain error " + fmt(worst) + ", " + fmt(secs) + " s";
  return worst <= 1e-5 && secs < 1.0;
}

// criterion 2: some lasso weight halves the nonzero count of the 20-chain
// gain while costing at most 10% extra.
bool criterion_2(std::string& detail) {
  const auto t0 = Clock::now();
  const Plant plant = make_laplacian(20);
  const DareSolution dare = solve_dare(plant.A, plant.B, plant.Q, plant.R);
  const double f_star = evaluate_policy(plant, Policy{dare.K_lqr}).f;

  std::vector<double> grid;
  for (double e = 0.0; e <= 4.01; e += 0.25) grid.push_back(std::pow(10.0, e));
  const bench::LambdaSweepResult sweep =
      bench::run_lambda_sweep(plant, Lasso{}, grid, SpiConfig{}, 4);

  bool found = false;
  double best_card = 400, best_factor = 0.0;
  for (const auto& row : sweep.rows) {
    if (row.status != "converged") continue;
    if (row.cardinality <= 200 && row.f_K <= 1.10 * f_star) {
      found = true;
      if (row.cardinality < best_card) {
        best_card = row.cardinality;
        best_factor = row.f_K / f_star;
      }
    }
  }
  const double secs = seconds_since(t0);
  detail = found ? "cardinality " + fmt(best_card) + "/400 at cost factor " +
                       fmt(best_factor) + ", " + fmt(secs) + " s"
                 : "no sweep point reached card <= 200 at cost <= 1.10 f*";
  return found && secs < 120.0;
}

// criterion 3: the largest stable fixed stepsize scales like 1/lambda.
bool criterion_3(std::string& detail) {
  const auto t0 = Clock::now();
  const Plant plant = make_laplacian(3);
  std::vector<double> grid;
  for (double e = 1.0; e <= 5.01; e += 0.5) grid.push_back(std::pow(10.0, e));
  const auto rows = bench::run_stepsize_dependency(plant, Lasso{}, grid, 500, 4);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    if (!(r.eta_max_stable > 0.0)) {
      detail = "no stable stepsize found at lambda " + fmt(r.lambda);
      return false;
    }
    const double x = std::log10(r.lambda);
    const double y = std::log10(r.eta_max_stable);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double secs = seconds_since(t0);
  detail = "log-log slope " + fmt(slope) + ", " + fmt(secs) + " s";
  return slope >= -1.2 && slope <= -0.8 && secs < 300.0;
}

// criterion 4: the heavy-lasso chain problem has a 3-sparse solution.
bool criterion_4(std::string& detail) {
  const auto t0 = Clock::now();
  const Plant plant = make_laplacian(3);
  const DareSolution dare = solve_dare(plant.A, plant.B, plant.Q, plant.R);
  const RegularizedProblem problem(plant, Lasso{}, 3000.0);
  const SolveReport report = solve(problem, Policy{dare.K_lqr}, SpiConfig{});
  const int card = cardinality(report.final_policy.K);
  const double secs = seconds_since(t0);
  detail = "status " + std::string(to_string(report.status)) + ", cardinality " +
           std::to_string(card) + ", " + fmt(secs) + " s";
  return report.status == SolveStatus::kConverged && card == 3 && secs < 1.0;
}

// criterion 5: at the same weight, a 3.7e-5 fixed step tracks the
// linesearch solution and a 1e-3 fixed step leaves the stabilizing set.
bool criterion_5(std::string& detail) {
  const auto t0 = Clock::now();
  const Plant plant = make_laplacian(3);
  SpiConfig ref;
  ref.eps_tol = 1e-9;

  const bench::FixedTraceResult good =
      bench::run_fixed_stepsize_trace(plant, Lasso{}, 3000.0, 3.7e-5, 20000, ref);
  const double err = good.rows.back().err_to_linesearch_solution;
  const bench::FixedTraceResult bad =
      bench::run_fixed_stepsize_trace(plant, Lasso{}, 3000.0, 1e-3, 20000, ref);
  const double secs = seconds_since(t0);
  detail = "small-step error " + fmt(err) + ", large-step status " + bad.status +
           ", " + fmt(secs) + " s";
  return good.status != "diverged" && err <= 1e-3 && bad.status == "diverged" &&
         secs < 30.0;
}

// criterion 6: on randomized instances every accepted step both descends
// by the prescribed amount and stays stabilizing.
bool criterion_6(std::string& detail) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> log_lambda(-2.0, 2.0);
  int steps_checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int m = 1 + static_cast<int>(rng() % 5);
    const Plant plant = oracles::random_stable_plant(rng, n, m);
    const double lambda = std::pow(10.0, log_lambda(rng));
    const RegularizedProblem problem(plant, Lasso{}, lambda);
    SpiConfig cfg;
    cfg.max_iters = 100;
    const SolveReport report = solve(problem, Policy{Matrix::Zero(m, n)}, cfg);
    for (size_t i = 1; i < report.trace.size(); ++i) {
      const auto& prev = report.trace[i - 1];
      const auto& cur = report.trace[i];
      const double drop = 0.5 * cur.eta * cur.grad_map_norm * cur.grad_map_norm;
      const double slack = 1e-9 * std::max(1.0, std::abs(prev.objective));
      if (cur.objective > prev.objective - drop + slack) {
        detail = "descent violated at trial " + std::to_string(trial) + " iter " +
                 std::to_string(cur.iter);
        return false;
      }
      if (!(cur.spectral_radius < 1.0)) {
        detail = "unstable accepted iterate at trial " + std::to_string(trial);
        return false;
      }
      ++steps_checked;
    }
  }
  const double secs = seconds_since(t0);
  detail = std::to_string(steps_checked) + " accepted steps checked, " + fmt(secs) +
           " s";
  return steps_checked > 100 && secs < 60.0;
}

// criterion 7: the analytic policy gradient agrees with central
// differences.
bool criterion_7(std::string& detail) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(707);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Plant plant = oracles::random_stable_plant(rng, 3, 3);
    Policy pol{0.05 * oracles::randn_matrix(rng, 3, 3)};
    if (!is_stabilizing(plant, pol)) pol.K.setZero();
    const Evaluation eval = evaluate_policy(plant, pol);
    const Matrix g = policy_gradient(plant, pol, eval);
    const Matrix g_fd = oracles::fd_gradient(plant, pol.K);
    worst = std::max(worst, (g - g_fd).norm() / std::max(1.0, g_fd.norm()));
  }
  const double secs = seconds_since(t0);
  detail = "worst relative error " + fmt(worst) + ", " + fmt(secs) + " s";
  return worst <= 1e-4 && secs < 10.0;
}

// criterion 8: each closed-form prox beats a derivative-free minimizer of
// its own objective.
bool criterion_8(std::string& detail) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(808);
  auto prox_objective = [](const Matrix& K, const Matrix& G, const Regularizer& reg,
                           double w) {
    if (std::holds_alternative<Nonnegative>(reg) ||
        std::holds_alternative<Simplex>(reg))
      return penalty_value(K, reg) + (K - G).squaredNorm();
    double r;
    if (const auto* en = std::get_if<ElasticNet>(&reg))
      r = en->lambda1 * K.cwiseAbs().sum() + 0.5 * en->lambda2 * K.squaredNorm();
    else
      r = penalty_value(K, reg);
    return r + (K - G).squaredNorm() / (2.0 * w);
  };

  int checked = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 1 + static_cast<int>(rng() % 3);
    const int cols = 1 + static_cast<int>(rng() % 3);
    const Matrix G = 2.0 * oracles::randn_matrix(rng, rows, cols);
    const double w = std::pow(10.0, -1.5 + 2.5 * (trial / 99.0));
    std::vector<Regularizer> regs{Lasso{},       Nuclear{},
                                  ElasticNet{0.6, 1.1},
                                  FrobToRef{oracles::randn_matrix(rng, rows, cols)},
                                  Nonnegative{}, Simplex{}};
    if (rows * cols >= 2) {
      GroupLasso gl;
      gl.groups = {{0, rows * cols - 1}};
      regs.push_back(gl);
    }
    for (const Regularizer& reg : regs) {
      const Matrix p = prox(G, reg, w);
      auto obj = [&](const Matrix& K) { return prox_objective(K, G, reg, w); };
      const Matrix q = oracles::pattern_search_min(obj, p, 0.5, 1e-7,
                                                   static_cast<unsigned>(trial));
      worst_gap = std::max(worst_gap, obj(p) - obj(q));
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  detail = std::to_string(checked) + " prox calls, worst objective gap " +
           fmt(worst_gap) + ", " + fmt(secs) + " s";
  return worst_gap <= 1e-6 && secs < 60.0;
}

// criterion 9: from the Riccati start the linesearch solver needs at most
// ten outer iterations across sizes and weights.
bool criterion_9(std::string& detail) {
  const auto t0 = Clock::now();
  int worst_iters = 0;
  for (int n : {3, 20, 100}) {
    const Plant plant = make_laplacian(n);
    const Policy K0{solve_dare(plant.A, plant.B, plant.Q, plant.R).K_lqr};
    for (double lambda : {1e-2, 1.0, 1e2, 1e4, 1e6}) {
      const RegularizedProblem problem(plant, Lasso{}, lambda);
      const SolveReport report = solve(problem, K0, SpiConfig{});
      if (report.status != SolveStatus::kConverged) {
        detail = "n=" + std::to_string(n) + " lambda=" + fmt(lambda) +
                 " status " + to_string(report.status);
        return false;
      }
      worst_iters = std::max(worst_iters, report.iterations);
    }
  }
  const double secs = seconds_since(t0);
  detail = "max iterations " + std::to_string(worst_iters) + ", " + fmt(secs) + " s";
  return worst_iters <= 10 && secs < 120.0;
}

// criterion 10: solve time grows essentially monotonically with size and
// the largest instance finishes within the budget.
bool criterion_10(std::string& detail) {
  const std::vector<int> sizes{10, 20, 100, 200, 350, 500};
  const auto rows = bench::run_scalability(sizes, Lasso{}, SpiConfig{}, 1);
  int inversions = 0;
  double n500_ms = 0.0;
  std::ostringstream curve;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].status != "converged") {
      detail = "n=" + std::to_string(rows[i].n) + " status " + rows[i].status;
      return false;
    }
    if (i > 0 && rows[i].elapsed_ms < rows[i - 1].elapsed_ms) ++inversions;
    if (rows[i].n == 500) n500_ms = rows[i].elapsed_ms;
    curve << (i ? " " : "") << rows[i].n << ":" << fmt(rows[i].elapsed_ms) << "ms";
  }
  detail = curve.str() + ", " + std::to_string(inversions) + " inversions";
  return inversions <= 1 && n500_ms < 600000.0;
}

// criterion 11: the zeroth-order solver stays within 0.05 of the Riccati
// gain on most seeds, and a large-sample gradient estimate points the
// right way.
bool criterion_11(std::string& detail) {
  const auto t0 = Clock::now();
  const Plant plant = make_laplacian(3);
  const DareSolution dare = solve_dare(plant.A, plant.B, plant.Q, plant.R);
  const RegularizedProblem problem(plant, Lasso{}, 0.0);
  const Policy K0{dare.K_lqr + 0.01 * Matrix::Constant(3, 3, 1.0 / 3.0)};

  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelFreeConfig cfg;
    cfg.n_traj = 200;
    cfg.horizon = 50;
    cfg.radius = 0.05;
    cfg.eta = 5e-8;
    cfg.eps_tol = 1e-9;
    cfg.max_iters = 300;
    cfg.seed = seed;
    cfg.threads = 4;
    const SolveReport report = solve_model_free(problem, K0, cfg);
    const double err = (report.final_policy.K - dare.K_lqr).norm();
    if (report.status != SolveStatus::kDiverged && err <= 0.05) ++hits;
  }

  // Probe policy with one chain mode pushed hard: the true gradient is
  // large there, so the estimate's direction is measurable.
  Eigen::SelfAdjointEigenSolver<Matrix> es(plant.A);
  const Vector v = es.eigenvectors().col(0);  // smallest mode
  const double k_cur = v.dot(dare.K_lqr * v);
  const Matrix K_push = dare.K_lqr + (-1.8 - k_cur) * (v * v.transpose());
  const Policy probe{K_push};
  if (!is_stabilizing(plant, probe)) {
    detail = "probe policy unexpectedly unstable";
    return false;
  }
  const Evaluation eval = evaluate_policy(plant, probe);
  const Matrix g_true = policy_gradient(plant, probe, eval);

  const int N = 10000, H = 150;
  const double r = 0.05;
  std::vector<TrajectorySample> samples(N);
  for (int j = 0; j < N; ++j) {
    Rng rng = make_trajectory_rng(123, 0, j);
    samples[j].U = sample_sphere(3, 3, r, rng);
    const Vector x0 = sample_x0(3, rng);
    samples[j].f_hat = rollout_cost(plant, K_push + samples[j].U, x0, H).cost;
  }
  const Matrix ghat = estimate_gradient(samples, r, 3, 3);
  const double cosine =
      (ghat.cwiseProduct(g_true)).sum() / (ghat.norm() * g_true.norm());

  const double secs = seconds_since(t0);
  detail = std::to_string(hits) + "/10 seeds within 0.05, cosine " + fmt(cosine) +
           ", " + fmt(secs) + " s";
  return hits >= 6 && cosine >= 0.9 && secs < 600.0;
}

// criterion 12: certified stepsize bounds are positive wherever they are
// defined, and the linesearch-free bound scales like 1/lambda for large
// weights.
bool criterion_12(std::string& detail) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1212);
  std::vector<std::pair<Plant, Policy>> cases;
  for (int n : {3, 20}) {
    const Plant plant = make_laplacian(n);
    const DareSolution dare = solve_dare(plant.A, plant.B, plant.Q, plant.R);
    cases.emplace_back(plant, Policy{dare.K_lqr});
  }
  for (int trial = 0; trial < 3; ++trial) {
    const Plant plant = oracles::random_stable_plant(rng, 4, 2);
    cases.emplace_back(plant, Policy{Matrix::Zero(2, 4)});
  }

  for (const auto& [plant, policy] : cases) {
    const Evaluation eval = evaluate_policy(plant, policy);
    for (double lambda : {0.0, 1.0, 1e3}) {
      for (const Regularizer& reg :
           std::vector<Regularizer>{Lasso{}, Nuclear{},
                                    FrobToRef{Matrix::Zero(policy.K.rows(),
                                                           policy.K.cols())}}) {
        const RegularizedProblem problem(plant, reg, lambda);
        const StepsizeBounds b = stepsize_bound(problem, policy, eval);
        if (!(b.eta_local > 0.0) || !(b.eta_global > 0.0) ||
            !std::isfinite(b.eta_local) || !std::isfinite(b.eta_global)) {
          detail = "nonpositive bound at lambda " + fmt(lambda);
          return false;
        }
      }
    }
  }

  const Plant plant = make_laplacian(3);
  const DareSolution dare = solve_dare(plant.A, plant.B, plant.Q, plant.R);
  const Policy K0{dare.K_lqr};
  const Evaluation eval = evaluate_policy(plant, K0);
  const StepsizeBounds b1 =
      stepsize_bound(RegularizedProblem(plant, Lasso{}, 1e8), K0, eval);
  const StepsizeBounds b2 =
      stepsize_bound(RegularizedProblem(plant, Lasso{}, 1e9), K0, eval);
  const double ratio = b1.eta_global / b2.eta_global;
  const double secs = seconds_since(t0);
  detail = "tenfold-lambda bound ratio " + fmt(ratio) + ", " + fmt(secs) + " s";
  return ratio >= 9.5 && ratio <= 10.5 && secs < 10.0;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Entry> entries{
      {1, "riccati-reduction", criterion_1},
      {2, "sparsity-tradeoff", criterion_2},
      {3, "stepsize-lambda-law", criterion_3},
      {4, "heavy-lasso-cardinality", criterion_4},
      {5, "fixed-step-divergence-threshold", criterion_5},
      {6, "descent-and-stability", criterion_6},
      {7, "gradient-correctness", criterion_7},
      {8, "prox-oracle-equivalence", criterion_8},
      {9, "iteration-count", criterion_9},
      {10, "scalability", criterion_10},
      {11, "model-free-convergence", criterion_11},
      {12, "stepsize-bound-diagnostics", criterion_12},
  };

  int failures = 0;
  for (const auto& e : entries) {
    std::string detail;
    bool ok = false;
    try {
      ok = e.fn(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    if (!ok) ++failures;
    std::printf("%s criterion-%d %s: %s\n", ok ? "PASS" : "FAIL", e.id, e.name,
                detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d of 12 criteria failed\n", failures);
  else std::printf("all 12 criteria passed\n");
  return failures == 0 ? 0 : 1;
}
