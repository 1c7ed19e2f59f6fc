#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spilqr/model_free.hpp"

namespace spilqr::bench {

inline constexpr const char* kVersion = "spilqr 0.1.0";

/// Chain-of-masses benchmark system: A tridiagonal with 1.1 on the diagonal
/// and 0.1 on the off-diagonals, B = Q = Sigma0 = I and R = 1000 I. The
/// open loop is unstable for every n.
Plant make_laplacian(int n);

/// Dense text format: first line "rows cols", then one whitespace-separated
/// row per line.
Matrix read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Matrix& M);

/// Flat key = value configuration text. '#' starts a comment; keys may not
/// repeat. Typed getters throw DomainError with the offending key on
/// missing or malformed values.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed() const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  /// Sorted "key = value" lines for CSV echo comments.
  std::vector<std::string> echo_lines() const;

 private:
  std::map<std::string, std::string> kv_;
};

/// Problem pieces assembled from a config: the plant (system = laplacian
/// with n, or system = files with A/B/Q/R/Sigma0 paths), the regularizer
/// (reg, lambda, and variant extras), the initial policy (k0 = riccati or a
/// file path) and solver settings.
struct ProblemSetup {
  Plant plant;
  Regularizer reg;
  double lambda = 0.0;
  Policy K0;
  SpiConfig spi;
  ModelFreeConfig mf;
};

ProblemSetup build_setup(const Config& config);

struct LambdaSweepRow {
  double lambda = 0.0;
  double f_K = 0.0;
  double F_K = 0.0;
  int cardinality = 0;
  int iterations = 0;
  double elapsed_ms = 0.0;
  std::string status;
};

struct LambdaSweepResult {
  std::vector<LambdaSweepRow> rows;
  std::vector<Matrix> final_gains;  // aligned with rows
};

/// Linesearch solve per grid value, initialized from the Riccati gain.
/// Per-point failures are recorded as status = "error" rather than thrown.
/// Grid points may run concurrently; rows keep grid order.
LambdaSweepResult run_lambda_sweep(const Plant& plant, const Regularizer& reg,
                                   const std::vector<double>& lambdas,
                                   const SpiConfig& spi, int threads);

struct StepsizeRow {
  double lambda = 0.0;
  double eta_max_stable = 0.0;
};

/// Largest fixed stepsize (within 5% bisection resolution) for which every
/// iterate of a fixed-step run from the Riccati gain stays stabilizing over
/// the iteration budget.
std::vector<StepsizeRow> run_stepsize_dependency(const Plant& plant,
                                                 const Regularizer& reg,
                                                 const std::vector<double>& lambdas,
                                                 int budget, int threads);

struct FixedTraceRow {
  int iter = 0;
  double F = 0.0;
  double f = 0.0;
  int cardinality = 0;
  double err_to_linesearch_solution = 0.0;
  double spectral_radius = 0.0;
};

struct FixedTraceResult {
  std::vector<FixedTraceRow> rows;
  std::string status;
  Matrix reference_gain;  // linesearch solution the errors are measured against
};

FixedTraceResult run_fixed_stepsize_trace(const Plant& plant, const Regularizer& reg,
                                          double lambda, double eta, int max_iters,
                                          const SpiConfig& reference_spi);

struct ScalabilityRow {
  int n = 0;
  double elapsed_ms = 0.0;
  int iterations = 0;
  std::string status;
};

/// Linesearch solve timing across problem sizes at fixed lambda = 1.
std::vector<ScalabilityRow> run_scalability(const std::vector<int>& sizes,
                                            const Regularizer& reg,
                                            const SpiConfig& spi, int threads);

struct ModelFreeRow {
  int iter = 0;
  double F_oracle = 0.0;
  double grad_est_norm = 0.0;
  int cardinality = 0;
  double spectral_radius = 0.0;
  std::uint64_t seed = 0;
};

struct ModelFreeRunResult {
  std::vector<ModelFreeRow> rows;
  std::string status;
  Matrix final_gain;
};

ModelFreeRunResult run_model_free(const RegularizedProblem& problem, const Policy& K0,
                                  const ModelFreeConfig& config);

/// CSV emission. Every file carries "# <version>" plus the config echo as
/// '#' comments, then a header row. Cells use a fixed "%.12g" format so a
/// rerun with identical inputs reproduces identical value columns
/// (elapsed_ms columns track wall time and are exempt).
void write_lambda_sweep_csv(const std::string& path, const LambdaSweepResult& result,
                            const std::vector<std::string>& echo);
void write_stepsize_csv(const std::string& path, const std::vector<StepsizeRow>& rows,
                        const std::vector<std::string>& echo);
void write_fixed_trace_csv(const std::string& path, const FixedTraceResult& result,
                           const std::vector<std::string>& echo);
void write_scalability_csv(const std::string& path,
                           const std::vector<ScalabilityRow>& rows,
                           const std::vector<std::string>& echo);
void write_model_free_csv(const std::string& path, const ModelFreeRunResult& result,
                          const std::vector<std::string>& echo);
void write_trace_csv(const std::string& path, const SolveReport& report,
                     const std::vector<std::string>& echo);

/// File name for the gain emitted alongside a sweep row, e.g.
/// "K_0003_lambda_615.txt".
std::string gain_file_name(int index, double lambda);

std::string format_cell(double v);

}  // namespace spilqr::bench
