// Command-line front end for the structured policy iteration experiments.
//
// Exit codes: 0 success, 1 configuration / input error, 2 numerical failure
// in a non-sweep command. Sweep-type commands record per-point failures in
// their CSV output instead of aborting.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "spilqr/bench.hpp"

namespace fs = std::filesystem;
using namespace spilqr;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string seed;     // optional override of the config seed
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
  cmd->add_option("--seed", args.seed, "RNG seed override");
  cmd->add_option("--threads", args.threads, "worker threads for grid points")
      ->check(CLI::PositiveNumber);
}

bench::Config load_config(const CommonArgs& args) {
  bench::Config cfg = bench::Config::from_file(args.config_path);
  if (!args.seed.empty()) cfg.set("seed", args.seed);
  fs::create_directories(args.out_dir);
  return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (fs::path(args.out_dir) / name).string();
}

int run_solve(const CommonArgs& args) {
  const bench::Config cfg = load_config(args);
  const bench::ProblemSetup setup = bench::build_setup(cfg);
  const RegularizedProblem problem(setup.plant, setup.reg, setup.lambda);

  SolveReport report;
  if (cfg.get_string("solver", "linesearch") == "model-free") {
    ModelFreeConfig mf = setup.mf;
    mf.threads = args.threads;
    report = solve_model_free(problem, setup.K0, mf);
  } else {
    report = solve(problem, setup.K0, setup.spi);
  }

  bench::write_trace_csv(out_path(args, "trace.csv"), report, cfg.echo_lines());
  bench::write_matrix_file(out_path(args, "K_final.txt"), report.final_policy.K);
  std::printf("status=%s iterations=%d F=%s cardinality=%d\n",
              to_string(report.status), report.iterations,
              bench::format_cell(report.trace.back().objective).c_str(),
              report.trace.back().cardinality);
  return report.status == SolveStatus::kConverged ||
                 report.status == SolveStatus::kMaxIters
             ? 0
             : 2;
}

int run_sweep_lambda(const CommonArgs& args) {
  const bench::Config cfg = load_config(args);
  const bench::ProblemSetup setup = bench::build_setup(cfg);
  const auto lambdas = cfg.get_double_list("lambda_grid");
  const auto result =
      bench::run_lambda_sweep(setup.plant, setup.reg, lambdas, setup.spi, args.threads);
  bench::write_lambda_sweep_csv(out_path(args, "sweep_lambda.csv"), result,
                                cfg.echo_lines());
  for (size_t i = 0; i < result.rows.size(); ++i)
    bench::write_matrix_file(
        out_path(args, bench::gain_file_name(static_cast<int>(i), lambdas[i])),
        result.final_gains[i]);
  std::printf("wrote %zu rows\n", result.rows.size());
  return 0;
}

int run_stepsize(const CommonArgs& args) {
  const bench::Config cfg = load_config(args);
  const bench::ProblemSetup setup = bench::build_setup(cfg);
  const auto lambdas = cfg.get_double_list("lambda_grid");
  const int budget = cfg.get_int("budget", 500);
  const auto rows =
      bench::run_stepsize_dependency(setup.plant, setup.reg, lambdas, budget, args.threads);
  bench::write_stepsize_csv(out_path(args, "stepsize_dependency.csv"), rows,
                            cfg.echo_lines());
  std::printf("wrote %zu rows\n", rows.size());
  return 0;
}

int run_fixed_trace(const CommonArgs& args) {
  const bench::Config cfg = load_config(args);
  const bench::ProblemSetup setup = bench::build_setup(cfg);
  const double eta = cfg.get_double("eta");
  const auto result = bench::run_fixed_stepsize_trace(
      setup.plant, setup.reg, setup.lambda, eta, setup.spi.max_iters, setup.spi);
  bench::write_fixed_trace_csv(out_path(args, "fixed_step_trace.csv"), result,
                               cfg.echo_lines());
  std::printf("status=%s rows=%zu\n", result.status.c_str(), result.rows.size());
  return 0;
}

int run_scalability(const CommonArgs& args) {
  const bench::Config cfg = load_config(args);
  bench::ProblemSetup setup = bench::build_setup(cfg);
  const auto sizes = cfg.get_int_list("n_grid");
  const auto rows = bench::run_scalability(sizes, setup.reg, setup.spi, args.threads);
  bench::write_scalability_csv(out_path(args, "scalability.csv"), rows,
                               cfg.echo_lines());
  std::printf("wrote %zu rows\n", rows.size());
  return 0;
}

int run_model_free_cmd(const CommonArgs& args) {
  const bench::Config cfg = load_config(args);
  const bench::ProblemSetup setup = bench::build_setup(cfg);
  const RegularizedProblem problem(setup.plant, setup.reg, setup.lambda);
  ModelFreeConfig mf = setup.mf;
  mf.threads = args.threads;
  const auto result = bench::run_model_free(problem, setup.K0, mf);
  bench::write_model_free_csv(out_path(args, "model_free.csv"), result,
                              cfg.echo_lines());
  bench::write_matrix_file(out_path(args, "K_final.txt"), result.final_gain);
  std::printf("status=%s rows=%zu\n", result.status.c_str(), result.rows.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured policy iteration experiments for regularized LQR"};
  app.require_subcommand(1);

  CommonArgs args;
  int (*runner)(const CommonArgs&) = nullptr;

  const std::pair<const char*, int (*)(const CommonArgs&)> commands[] = {
      {"solve", run_solve},
      {"sweep-lambda", run_sweep_lambda},
      {"stepsize-dependency", run_stepsize},
      {"fixed-step-trace", run_fixed_trace},
      {"scalability", run_scalability},
      {"model-free", run_model_free_cmd},
  };
  for (const auto& [name, fn] : commands) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common(cmd, args);
    cmd->callback([&runner, fn = fn] { runner = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return runner(args);
  } catch (const DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
