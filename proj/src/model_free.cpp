#include "spilqr/model_free.hpp"

#include <chrono>
#include <cmath>
#include <thread>

namespace spilqr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void fill_samples(const Plant& plant, const Matrix& K, const ModelFreeConfig& config,
                  int iteration, std::vector<TrajectorySample>& samples) {
  const int m = static_cast<int>(plant.m());
  const int n = static_cast<int>(plant.n());
  auto run_one = [&](int j) {
    Rng rng = make_trajectory_rng(config.seed, iteration, j);
    TrajectorySample& s = samples[j];
    s.U = sample_sphere(m, n, config.radius, rng);
    const Vector x0 = sample_x0(n, rng);
    const RolloutResult rr = rollout_cost(plant, K + s.U, x0, config.horizon);
    s.f_hat = rr.cost;
    s.diverged = rr.diverged;
  };
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    for (int j = 0; j < config.n_traj; ++j) run_one(j);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int j = t; j < config.n_traj; j += threads) run_one(j);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

Rng make_trajectory_rng(std::uint64_t seed, int iteration, int trajectory) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(iteration));
  s = splitmix64(s ^ static_cast<std::uint64_t>(trajectory));
  return Rng(s);
}

Matrix sample_sphere(int m, int n, double radius, Rng& rng) {
  if (m < 1 || n < 1) throw DimensionError("sphere dimensions must be >= 1");
  if (!(radius > 0.0)) throw DomainError("radius must be > 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix U(m, n);
  double nrm = 0.0;
  do {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) U(i, j) = gauss(rng);
    nrm = U.norm();
  } while (nrm == 0.0);
  return U * (radius / nrm);
}

Vector sample_x0(int n, Rng& rng) {
  if (n < 1) throw DimensionError("state dimension must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x(n);
  double nrm = 0.0;
  do {
    for (int i = 0; i < n; ++i) x(i) = gauss(rng);
    nrm = x.norm();
  } while (nrm == 0.0);
  return x * (std::sqrt(static_cast<double>(n)) / nrm);
}

RolloutResult rollout_cost(const Plant& plant, const Matrix& K, const Vector& x0,
                           int horizon) {
  if (horizon < 0) throw DomainError("horizon must be >= 0");
  if (K.rows() != plant.m() || K.cols() != plant.n())
    throw DimensionError("K must be m x n");
  if (x0.size() != plant.n()) throw DimensionError("x0 must have length n");

  const Matrix closed = plant.A + plant.B * K;
  const Matrix stage = plant.Q + K.transpose() * plant.R * K;
  RolloutResult out;
  Vector x = x0;
  for (int t = 0; t <= horizon; ++t) {
    const double g = x.dot(stage * x);
    out.cost += g;
    if (!std::isfinite(out.cost) || out.cost > kRolloutCostCeiling) {
      out.cost = kRolloutCostCeiling;
      out.diverged = true;
      break;
    }
    x = closed * x;
  }
  return out;
}

Matrix estimate_gradient(const std::vector<TrajectorySample>& samples, double radius,
                         int m, int n) {
  if (samples.empty()) throw DomainError("gradient estimate needs at least one sample");
  if (!(radius > 0.0)) throw DomainError("radius must be > 0");
  const double d = static_cast<double>(n) * static_cast<double>(m);
  Matrix g = Matrix::Zero(m, n);
  for (const auto& s : samples) {
    if (s.U.rows() != m || s.U.cols() != n)
      throw DimensionError("sample shape does not match m x n");
    g += s.f_hat * s.U;
  }
  return g * (d / (radius * radius * static_cast<double>(samples.size())));
}

SolveReport solve_model_free(const RegularizedProblem& problem, const Policy& K0,
                             const ModelFreeConfig& config) {
  if (config.n_traj < 1) throw DomainError("n_traj must be >= 1");
  if (!(config.eta > 0.0)) throw DomainError("eta must be > 0");
  if (!(config.eps_tol > 0.0)) throw DomainError("eps_tol must be > 0");
  if (!is_stabilizing(problem.plant, K0))
    throw InstabilityError("initial policy is not stabilizing");

  const auto t0 = Clock::now();
  const int m = static_cast<int>(problem.plant.m());
  const int n = static_cast<int>(problem.plant.n());

  auto oracle_record = [&](int iter, const Policy& policy) {
    const Evaluation eval = evaluate_policy(problem.plant, policy);
    IterationRecord rec;
    rec.iter = iter;
    rec.smooth_cost = eval.f;
    rec.penalty = penalty_value(policy.K, problem.reg);
    rec.objective = std::isinf(rec.penalty)
                        ? rec.penalty
                        : eval.f + problem.lambda * rec.penalty;
    rec.spectral_radius =
        spectral_radius(problem.plant.A + problem.plant.B * policy.K);
    rec.cardinality = cardinality(policy.K);
    rec.elapsed_ms = ms_since(t0);
    return rec;
  };

  SolveReport report;
  report.final_policy = K0;
  report.status = SolveStatus::kMaxIters;

  Policy K = K0;
  report.trace.push_back(oracle_record(0, K));

  std::vector<TrajectorySample> samples(config.n_traj);
  for (int i = 0; i < config.max_iters; ++i) {
    fill_samples(problem.plant, K.K, config, i, samples);
    const Matrix ghat = estimate_gradient(samples, config.radius, m, n);

    const Matrix G = K.K - config.eta * ghat;
    const Policy K_next{prox(G, problem.reg, problem.lambda * config.eta)};
    if (!is_stabilizing(problem.plant, K_next)) {
      report.status = SolveStatus::kDiverged;
      break;
    }

    const double step = (K_next.K - K.K).norm();
    K = K_next;
    report.iterations = i + 1;

    IterationRecord rec = oracle_record(i + 1, K);
    rec.eta = config.eta;
    rec.grad_map_norm = step / config.eta;
    rec.grad_estimate_norm = ghat.norm();
    report.trace.push_back(rec);

    if (step <= config.eps_tol) {
      report.status = SolveStatus::kConverged;
      break;
    }
  }

  report.final_policy = K;
  return report;
}

}  // namespace spilqr
