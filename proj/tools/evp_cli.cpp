#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "evp/errors.hpp"
#include "evp/parallel.hpp"

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  unexpected failure\n"
    "  2  bad input file (unreadable, malformed, non-symmetric matrix)\n"
    "  3  parameter error (unknown name, value outside domain, bad flag,\n"
    "     snapshot mismatch, invalid state)\n"
    "  4  numerical error (e.g. overlap not positive definite, no convergence)\n"
    "Environment: EVP_THREADS caps the worker count (0 = auto).";

void add_param_options(CLI::App* cmd, evp::cli::ParamOptions& p) {
  cmd->add_option("--params", p.params_file, "Parameter file (name = value per line)");
  cmd->add_option("--set", p.assignments, "Override one parameter, name=value (repeatable)");
  cmd->add_option("--solver", p.solver, "1 = one-stage, 2 = two-stage");
  cmd->add_option("--kernel", p.kernel, "Back-transformation kernel: generic, blocked, wide");
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace evp::cli;

  CLI::App app{"Dense symmetric and generalized eigensolver"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve A v = lambda v or A v = lambda B v from matrix files");
  solve_cmd->add_option("--matrix", solve.matrix, "Symmetric matrix file (EVP1)")->required();
  solve_cmd->add_option("--overlap", solve.overlap, "SPD overlap matrix file, or its inverse Cholesky factor");
  solve_cmd->add_flag("--already-decomposed", solve.already_decomposed,
                      "The overlap file holds the inverse Cholesky factor (see --save-factor)");
  solve_cmd->add_option("--nev", solve.nev, "Number of eigenvectors")->required();
  solve_cmd->add_option("--out", solve.out, "Eigenvalue CSV (default stdout)");
  solve_cmd->add_option("--vectors", solve.vectors, "Eigenvector sidecar file (EVPV)");
  solve_cmd->add_option("--save-factor", solve.save_factor, "Write the inverse Cholesky factor of the overlap");
  solve_cmd->add_option("--record", solve.record, "Run record CSV");
  add_param_options(solve_cmd, solve.params);

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the solver stages on a seeded random matrix");
  bench_cmd->add_option("--n", bench.n, "Matrix order")->required();
  bench_cmd->add_option("--seed", bench.seed, "Matrix seed");
  bench_cmd->add_option("--repeats", bench.repeats, "Number of timed solves");
  bench_cmd->add_option("--nev", bench.nev, "Number of eigenvectors (default n)");
  bench_cmd->add_option("--out", bench.out, "CSV output (default stdout)");
  add_param_options(bench_cmd, bench.params);

  TuneOptions tune;
  auto* tune_cmd = app.add_subcommand("tune", "Run an autotuning sweep on a seeded random matrix");
  tune_cmd->add_option("--level", tune.level, "fast or medium");
  tune_cmd->add_option("--n", tune.n, "Matrix order")->required();
  tune_cmd->add_option("--seed", tune.seed, "Matrix seed");
  tune_cmd->add_option("--nev", tune.nev, "Number of eigenvectors (default n)");
  tune_cmd->add_option("--snapshot", tune.snapshot, "Write the sweep state here on exit");
  tune_cmd->add_option("--resume", tune.resume, "Continue from a snapshot");
  tune_cmd->add_option("--max-steps", tune.max_steps, "Stop after this many timed solves");
  tune_cmd->add_option("--confirm", tune.confirm, "Re-measure the best M combinations");
  tune_cmd->add_option("--confirm-repeats", tune.confirm_repeats, "Solves per confirmation candidate");
  tune_cmd->add_option("--best", tune.best, "Write the best parameters as a parameter file");
  tune_cmd->add_option("--csv", tune.csv, "Per-combination timings CSV");
  add_param_options(tune_cmd, tune.params);

  ScfOptions scf;
  auto* scf_cmd = app.add_subcommand("scf", "Run a synthetic self-consistent-field cycle");
  scf_cmd->add_option("--n", scf.n, "Matrix order");
  scf_cmd->add_option("--k", scf.k, "Occupied states");
  scf_cmd->add_option("--alpha", scf.alpha, "Density coupling");
  scf_cmd->add_option("--mu", scf.mu, "Overlap off-diagonal weight, in [0, 0.3]");
  scf_cmd->add_option("--mix", scf.mix, "Linear mixing factor, in (0, 1]");
  scf_cmd->add_option("--seed", scf.seed, "Hamiltonian seed");
  scf_cmd->add_option("--max-iter", scf.max_iter, "Step limit");
  scf_cmd->add_option("--tol", scf.tol, "Convergence threshold on the density change");
  scf_cmd->add_option("--sp-until", scf.sp_until, "Single precision multiply and eigensolver through this step")
      ->expected(0, 1)
      ->default_str("20");
  scf_cmd->add_flag("--sp-invert", scf.sp_invert, "Single precision triangular inversion");
  scf_cmd->add_option("--autotune", scf.autotune, "Autotune during the cycle: fast or medium");
  scf_cmd->add_option("--transfer", scf.transfer, "Compare default and tuned handles on this many perturbed copies");
  scf_cmd->add_option("--displacement", scf.displacement, "Relative perturbation of the copies");
  scf_cmd->add_option("--out", scf.out, "Trace CSV (default stdout)");
  scf_cmd->add_option("--transfer-out", scf.transfer_out, "Transfer table CSV (default stdout)");
  add_param_options(scf_cmd, scf.params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParameter;
  }

  const std::string command_line = join_args(argc, argv);
  try {
    evp::configure_workers_from_env();
    if (*solve_cmd) return run_solve(solve, command_line);
    if (*bench_cmd) return run_bench(bench, command_line);
    if (*tune_cmd) return run_tune(tune, command_line);
    if (*scf_cmd) return run_scf_command(scf, command_line);
  } catch (const evp::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const evp::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const evp::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const evp::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const evp::StateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
