#include "spilqr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace spilqr::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw DomainError("config key '" + key + "' is not a number: '" + text + "'");
  return v;
}

// Runs fn(0..count-1), at most `threads` at a time. Exceptions must not
// escape fn; results are indexed so scheduling cannot reorder output.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  return os;
}

void write_preamble(std::ofstream& os, const std::vector<std::string>& echo) {
  os << "# " << kVersion << "\n";
  for (const auto& line : echo) os << "# " << line << "\n";
}

}  // namespace

Plant make_laplacian(int n) {
  if (n < 1) throw DimensionError("laplacian size must be >= 1");
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 1.1;
    if (i + 1 < n) {
      A(i, i + 1) = 0.1;
      A(i + 1, i) = 0.1;
    }
  }
  const Matrix I = Matrix::Identity(n, n);
  return Plant(A, I, I, 1000.0 * I, I);
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot open matrix file '" + path + "'");
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 1 || cols < 1)
    throw DomainError("matrix file '" + path + "' must start with 'rows cols'");
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(is >> M(i, j)))
        throw DomainError("matrix file '" + path + "' is truncated");
  return M;
}

void write_matrix_file(const std::string& path, const Matrix& M) {
  std::ofstream os = open_output(path);
  os << M.rows() << " " << M.cols() << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
      os << buf << (j + 1 < M.cols() ? " " : "");
    }
    os << "\n";
  }
}

Config Config::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << is.rdbuf();
  return from_text(buffer.str());
}

Config Config::from_text(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError("config line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw DomainError("config line " + std::to_string(lineno) + " has an empty key");
    if (cfg.kv_.count(key))
      throw DomainError("config key '" + key + "' appears twice");
    cfg.kv_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw DomainError("config key '" + key + "' is required");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_double(key, it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const double v = parse_double(key, it->second);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw DomainError("config key '" + key + "' must be an integer");
  return i;
}

std::uint64_t Config::get_seed() const {
  const auto it = kv_.find("seed");
  if (it == kv_.end()) return 0;
  const std::string t = trim(it->second);
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw DomainError("config key 'seed' is not an unsigned integer");
  return v;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : split(get_string(key), ',')) {
    if (trim(part).empty()) continue;
    out.push_back(parse_double(key, part));
  }
  if (out.empty()) throw DomainError("config key '" + key + "' lists no values");
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (double v : get_double_list(key)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw DomainError("config key '" + key + "' must list integers");
    out.push_back(i);
  }
  return out;
}

std::vector<std::string> Config::echo_lines() const {
  std::vector<std::string> out;
  out.reserve(kv_.size());
  for (const auto& [k, v] : kv_) out.push_back(k + " = " + v);
  return out;
}

ProblemSetup build_setup(const Config& config) {
  const std::string system = config.get_string("system", "laplacian");
  auto make_plant = [&]() -> Plant {
    if (system == "laplacian") {
      const int n = config.get_int("n", -1);
      if (n < 1) throw DomainError("config key 'n' is required for system = laplacian");
      return make_laplacian(n);
    }
    if (system == "files") {
      return Plant(read_matrix_file(config.get_string("A")),
                   read_matrix_file(config.get_string("B")),
                   read_matrix_file(config.get_string("Q")),
                   read_matrix_file(config.get_string("R")),
                   read_matrix_file(config.get_string("Sigma0")));
    }
    throw DomainError("config key 'system' must be 'laplacian' or 'files'");
  };

  auto make_reg = [&]() -> Regularizer {
    const std::string reg = config.get_string("reg", "lasso");
    if (reg == "lasso") return Lasso{};
    if (reg == "nuclear") return Nuclear{};
    if (reg == "nonnegative") return Nonnegative{};
    if (reg == "simplex") return Simplex{};
    if (reg == "elastic-net")
      return ElasticNet{config.get_double("lambda1"), config.get_double("lambda2")};
    if (reg == "frob-to-ref")
      return FrobToRef{read_matrix_file(config.get_string("k_ref"))};
    if (reg == "group-lasso") {
      GroupLasso gl;
      for (const auto& part : split(config.get_string("groups"), ';')) {
        if (trim(part).empty()) continue;
        std::vector<int> group;
        for (const auto& idx : split(part, ','))
          group.push_back(static_cast<int>(parse_double("groups", idx)));
        gl.groups.push_back(std::move(group));
      }
      if (gl.groups.empty()) throw DomainError("config key 'groups' lists no groups");
      return gl;
    }
    throw DomainError("unknown regularizer '" + reg + "'");
  };

  Plant plant = make_plant();
  ProblemSetup setup{plant, make_reg(), config.get_double("lambda", 0.0),
                     Policy{}, SpiConfig{}, ModelFreeConfig{}};

  const std::string k0 = config.get_string("k0", "riccati");
  if (k0 == "riccati")
    setup.K0.K = solve_dare(plant.A, plant.B, plant.Q, plant.R).K_lqr;
  else
    setup.K0.K = read_matrix_file(k0);

  setup.spi.beta = config.get_double("beta", 0.5);
  setup.spi.eps_tol = config.get_double("eps_tol", 1e-6);
  setup.spi.max_iters = config.get_int("max_iters", 500);
  setup.spi.max_linesearch = config.get_int("max_linesearch", 100);
  if (config.has("eta0")) setup.spi.eta0 = config.get_double("eta0");

  setup.mf.n_traj = config.get_int("n_traj", 200);
  setup.mf.horizon = config.get_int("horizon", 50);
  setup.mf.radius = config.get_double("radius", 0.05);
  setup.mf.eta = config.get_double("eta", 1e-4);
  setup.mf.eps_tol = config.get_double("eps_tol", 1e-6);
  setup.mf.max_iters = config.get_int("max_iters", 100);
  setup.mf.seed = config.get_seed();
  return setup;
}

LambdaSweepResult run_lambda_sweep(const Plant& plant, const Regularizer& reg,
                                   const std::vector<double>& lambdas,
                                   const SpiConfig& spi, int threads) {
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < 0.0) throw DomainError("lambda grid values must be >= 0");
    if (i > 0 && lambdas[i] <= lambdas[i - 1])
      throw DomainError("lambda grid must be strictly increasing");
  }
  const Policy K0{solve_dare(plant.A, plant.B, plant.Q, plant.R).K_lqr};

  LambdaSweepResult result;
  result.rows.resize(lambdas.size());
  result.final_gains.resize(lambdas.size());
  parallel_for(static_cast<int>(lambdas.size()), threads, [&](int i) {
    LambdaSweepRow& row = result.rows[i];
    row.lambda = lambdas[i];
    const auto t0 = Clock::now();
    try {
      const RegularizedProblem problem(plant, reg, lambdas[i]);
      const SolveReport report = solve(problem, K0, spi);
      row.elapsed_ms = ms_since(t0);
      row.f_K = report.trace.back().smooth_cost;
      row.F_K = report.trace.back().objective;
      row.cardinality = report.trace.back().cardinality;
      row.iterations = report.iterations;
      row.status = to_string(report.status);
      result.final_gains[i] = report.final_policy.K;
    } catch (const Error&) {
      row.elapsed_ms = ms_since(t0);
      row.f_K = std::numeric_limits<double>::infinity();
      row.F_K = std::numeric_limits<double>::infinity();
      row.status = "error";
      result.final_gains[i] = K0.K;
    }
  });
  return result;
}

std::vector<StepsizeRow> run_stepsize_dependency(const Plant& plant,
                                                 const Regularizer& reg,
                                                 const std::vector<double>& lambdas,
                                                 int budget, int threads) {
  if (budget < 1) throw DomainError("stepsize probe budget must be >= 1");
  const Policy K0{solve_dare(plant.A, plant.B, plant.Q, plant.R).K_lqr};

  std::vector<StepsizeRow> rows(lambdas.size());
  parallel_for(static_cast<int>(lambdas.size()), threads, [&](int i) {
    const double lambda = lambdas[i];
    rows[i].lambda = lambda;
    const RegularizedProblem problem(plant, reg, lambda);
    auto stable_at = [&](double eta) {
      try {
        return solve_fixed_step(problem, K0, eta, budget, 1e-12).status !=
               SolveStatus::kDiverged;
      } catch (const Error&) {
        return false;
      }
    };

    double lo = 1.0 / std::max(lambda, kLambdaFloor);
    double hi = lo;
    if (stable_at(lo)) {
      bool bracketed = false;
      for (int k = 0; k < 200; ++k) {
        hi = lo * 2.0;
        if (!stable_at(hi)) {
          bracketed = true;
          break;
        }
        lo = hi;
      }
      if (!bracketed) {
        rows[i].eta_max_stable = lo;
        return;
      }
    } else {
      bool bracketed = false;
      for (int k = 0; k < 200; ++k) {
        lo = hi / 2.0;
        if (stable_at(lo)) {
          bracketed = true;
          break;
        }
        hi = lo;
      }
      if (!bracketed) {
        rows[i].eta_max_stable = 0.0;
        return;
      }
    }
    while (hi / lo > 1.05) {
      const double mid = std::sqrt(lo * hi);
      if (stable_at(mid))
        lo = mid;
      else
        hi = mid;
    }
    rows[i].eta_max_stable = lo;
  });
  return rows;
}

namespace {

// Solves X = M1 X M2 + W through the dense n^2 x n^2 Kronecker system.  Unlike
// the stability-gated series solver this keeps producing finite values when
// rho(A + BK) >= 1, which the fixed-stepsize trace needs: iterates can pass
// through unstable policies and later re-enter the stable region.  Cost is
// O(n^6), fine for the small plants this experiment targets.
bool solve_stein(const Matrix& M1, const Matrix& M2, const Matrix& W, Matrix& X) {
  if (!M1.allFinite() || !M2.allFinite() || !W.allFinite()) return false;
  const int n = static_cast<int>(W.rows());
  const int n2 = n * n;
  Matrix T = Matrix::Identity(n2, n2);
  // vec(M1 X M2) = kron(M2^T, M1) vec(X) with column-major vec.
  for (int i1 = 0; i1 < n; ++i1)
    for (int j1 = 0; j1 < n; ++j1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int j2 = 0; j2 < n; ++j2)
          T(i1 * n + i2, j1 * n + j2) -= M2(j1, i1) * M1(i2, j2);
  const Eigen::Map<const Eigen::VectorXd> b(W.data(), n2);
  const Eigen::VectorXd x = T.partialPivLu().solve(b);
  if (!x.allFinite()) return false;
  X = Eigen::Map<const Matrix>(x.data(), n, n);
  // Resonant closed loops (eigenvalue products hitting 1) make the system
  // singular; reject those instead of propagating garbage.
  if ((X - M1 * X * M2 - W).norm() > 1e-6 * std::max(1.0, W.norm())) return false;
  X = 0.5 * (X + X.transpose().eval());
  return true;
}

}  // namespace

FixedTraceResult run_fixed_stepsize_trace(const Plant& plant, const Regularizer& reg,
                                          double lambda, double eta, int max_iters,
                                          const SpiConfig& reference_spi) {
  const RegularizedProblem problem(plant, reg, lambda);
  const Policy K0{solve_dare(plant.A, plant.B, plant.Q, plant.R).K_lqr};

  FixedTraceResult result;
  const SolveReport ref = solve(problem, K0, reference_spi);
  result.reference_gain = ref.final_policy.K;

  auto push_row = [&](int iter, const Policy& policy, double f) {
    FixedTraceRow row;
    row.iter = iter;
    row.f = f;
    const double pen = penalty_value(policy.K, problem.reg);
    row.F = std::isinf(pen) ? pen : f + lambda * pen;
    row.cardinality = cardinality(policy.K);
    row.err_to_linesearch_solution = (policy.K - result.reference_gain).norm();
    row.spectral_radius = spectral_radius(plant.A + plant.B * policy.K);
    result.rows.push_back(row);
  };

  // Value and covariance by direct solve so the trace survives transiently
  // unstable iterates; f = Tr(Sigma0 P) is then the analytic continuation of
  // the stable-region cost.
  Matrix P, Sigma;
  auto eval_anywhere = [&](const Matrix& Km) {
    const Matrix M = plant.A + plant.B * Km;
    return solve_stein(M.transpose(), M, plant.Q + Km.transpose() * plant.R * Km,
                       P) &&
           solve_stein(M, M.transpose(), plant.Sigma0, Sigma);
  };

  Policy K = K0;
  bool blown_up = !eval_anywhere(K.K);
  bool small_step = false;
  if (!blown_up) push_row(0, K, (plant.Sigma0 * P).trace());
  for (int i = 0; i < max_iters && !blown_up; ++i) {
    const Matrix grad =
        2.0 * ((plant.R + plant.B.transpose() * P * plant.B) * K.K +
               plant.B.transpose() * P * plant.A) *
        Sigma;
    Policy K_next;
    try {
      K_next = prox_grad_step(problem, K, grad, eta);
    } catch (const Error&) {
      blown_up = true;
      break;
    }
    if (!K_next.K.allFinite()) {
      blown_up = true;
      break;
    }
    const double step = (K_next.K - K.K).norm();
    K = K_next;
    if (!eval_anywhere(K.K)) {
      blown_up = true;
      break;
    }
    push_row(i + 1, K, (plant.Sigma0 * P).trace());
    if (step <= 1e-12) {
      small_step = true;
      break;
    }
  }

  // "Diverged" covers both numerical blow-up and ending at an unstable
  // policy (e.g. parking on a fixed point of the thresholded iteration that
  // does not stabilize the plant).
  if (blown_up || !is_stabilizing(plant, K))
    result.status = to_string(SolveStatus::kDiverged);
  else if (small_step)
    result.status = to_string(SolveStatus::kConverged);
  else
    result.status = to_string(SolveStatus::kMaxIters);
  return result;
}

std::vector<ScalabilityRow> run_scalability(const std::vector<int>& sizes,
                                            const Regularizer& reg,
                                            const SpiConfig& spi, int threads) {
  std::vector<ScalabilityRow> rows(sizes.size());
  parallel_for(static_cast<int>(sizes.size()), threads, [&](int i) {
    ScalabilityRow& row = rows[i];
    row.n = sizes[i];
    try {
      const Plant plant = make_laplacian(sizes[i]);
      const Policy K0{solve_dare(plant.A, plant.B, plant.Q, plant.R).K_lqr};
      const RegularizedProblem problem(plant, reg, 1.0);
      const auto t0 = Clock::now();
      const SolveReport report = solve(problem, K0, spi);
      row.elapsed_ms = ms_since(t0);
      row.iterations = report.iterations;
      row.status = to_string(report.status);
    } catch (const Error&) {
      row.status = "error";
    }
  });
  return rows;
}

ModelFreeRunResult run_model_free(const RegularizedProblem& problem, const Policy& K0,
                                  const ModelFreeConfig& config) {
  const SolveReport report = solve_model_free(problem, K0, config);
  ModelFreeRunResult result;
  result.status = to_string(report.status);
  result.final_gain = report.final_policy.K;
  result.rows.reserve(report.trace.size());
  for (const auto& rec : report.trace) {
    ModelFreeRow row;
    row.iter = rec.iter;
    row.F_oracle = rec.objective;
    row.grad_est_norm = rec.grad_estimate_norm;
    row.cardinality = rec.cardinality;
    row.spectral_radius = rec.spectral_radius;
    row.seed = config.seed;
    result.rows.push_back(row);
  }
  return result;
}

std::string format_cell(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_lambda_sweep_csv(const std::string& path, const LambdaSweepResult& result,
                            const std::vector<std::string>& echo) {
  std::ofstream os = open_output(path);
  write_preamble(os, echo);
  os << "lambda,f_K,F_K,cardinality,iterations,elapsed_ms,status\n";
  for (const auto& r : result.rows)
    os << format_cell(r.lambda) << "," << format_cell(r.f_K) << ","
       << format_cell(r.F_K) << "," << r.cardinality << "," << r.iterations << ","
       << format_cell(r.elapsed_ms) << "," << r.status << "\n";
}

void write_stepsize_csv(const std::string& path, const std::vector<StepsizeRow>& rows,
                        const std::vector<std::string>& echo) {
  std::ofstream os = open_output(path);
  write_preamble(os, echo);
  os << "lambda,eta_max_stable\n";
  for (const auto& r : rows)
    os << format_cell(r.lambda) << "," << format_cell(r.eta_max_stable) << "\n";
}

void write_fixed_trace_csv(const std::string& path, const FixedTraceResult& result,
                           const std::vector<std::string>& echo) {
  std::ofstream os = open_output(path);
  write_preamble(os, echo);
  os << "# status = " << result.status << "\n";
  os << "iter,F,f,cardinality,err_to_linesearch_solution,spectral_radius\n";
  for (const auto& r : result.rows)
    os << r.iter << "," << format_cell(r.F) << "," << format_cell(r.f) << ","
       << r.cardinality << "," << format_cell(r.err_to_linesearch_solution) << ","
       << format_cell(r.spectral_radius) << "\n";
}

void write_scalability_csv(const std::string& path,
                           const std::vector<ScalabilityRow>& rows,
                           const std::vector<std::string>& echo) {
  std::ofstream os = open_output(path);
  write_preamble(os, echo);
  os << "# lambda = 1 (fixed for the size sweep)\n";
  os << "n,elapsed_ms,iterations,status\n";
  for (const auto& r : rows)
    os << r.n << "," << format_cell(r.elapsed_ms) << "," << r.iterations << ","
       << r.status << "\n";
}

void write_model_free_csv(const std::string& path, const ModelFreeRunResult& result,
                          const std::vector<std::string>& echo) {
  std::ofstream os = open_output(path);
  write_preamble(os, echo);
  os << "# F_oracle is simulator-side telemetry, never visible to the solver\n";
  os << "# status = " << result.status << "\n";
  os << "iter,F_oracle,grad_est_norm,cardinality,spectral_radius,seed\n";
  for (const auto& r : result.rows)
    os << r.iter << "," << format_cell(r.F_oracle) << ","
       << format_cell(r.grad_est_norm) << "," << r.cardinality << ","
       << format_cell(r.spectral_radius) << "," << r.seed << "\n";
}

void write_trace_csv(const std::string& path, const SolveReport& report,
                     const std::vector<std::string>& echo) {
  std::ofstream os = open_output(path);
  write_preamble(os, echo);
  os << "# status = " << to_string(report.status) << "\n";
  os << "iter,F,f,penalty,eta,grad_map_norm,grad_est_norm,spectral_radius,"
        "cardinality,elapsed_ms\n";
  for (const auto& r : report.trace)
    os << r.iter << "," << format_cell(r.objective) << ","
       << format_cell(r.smooth_cost) << "," << format_cell(r.penalty) << ","
       << format_cell(r.eta) << "," << format_cell(r.grad_map_norm) << ","
       << format_cell(r.grad_estimate_norm) << ","
       << format_cell(r.spectral_radius) << "," << r.cardinality << ","
       << format_cell(r.elapsed_ms) << "\n";
}

std::string gain_file_name(int index, double lambda) {
  char idx[16];
  std::snprintf(idx, sizeof idx, "%04d", index);
  std::string lam = format_cell(lambda);
  std::string clean;
  for (char c : lam)
    if (c != '+') clean.push_back(c);
  return std::string("K_") + idx + "_lambda_" + clean + ".txt";
}

}  // namespace spilqr::bench
