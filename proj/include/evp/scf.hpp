#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evp/autotune.hpp"
#include "evp/solver.hpp"

namespace evp {

/// Synthetic self-consistent-field problem. At step t the solver is handed
/// A_t = H0 + alpha * diag(rho_{t-1}) with the fixed overlap B, and the new
/// density is the squared row norm of the k lowest eigenvectors, linearly
/// mixed with the previous one.
struct ScfProblem {
  Index n = 0;
  Index k = 0;
  std::uint64_t seed = 0;
  double alpha = 0;
  double mu = 0;
  double mix = 1;
  Matrix<double> h0;  // spectrum 1..n
  Matrix<double> b;   // I + mu * P, P = ones on the first off-diagonals
};

/// Throws ArgumentError for parameters outside 1 <= k <= n, alpha >= 0,
/// mu in [0, 0.3], mix in (0, 1].
ScfProblem build_problem(Index n, Index k, std::uint64_t seed, double alpha, double mu, double mix);

Matrix<double> scf_hamiltonian(const ScfProblem& p, const Vector<double>& rho);

struct ScfStepResult {
  Vector<double> rho;
  double energy = 0;
  SolveReport report;
};

/// One SCF step. `b_storage` starts as a copy of p.b; the first step of a
/// cycle (b_decomposed = false) overwrites it with the inverse Cholesky
/// factor, which later steps reuse.
ScfStepResult scf_step(const ScfProblem& p, const Vector<double>& rho_prev, Solver& h,
                       Matrix<double>& b_storage, bool b_decomposed);

/// Step precision settings in force from SCF step `from_step` (1-based) on.
struct PrecisionPhase {
  int from_step = 1;
  std::string cholesky = "dp";
  std::string invert = "dp";
  std::string multiply = "dp";
  std::string esolve = "dp";
};

struct PrecisionSchedule {
  std::vector<PrecisionPhase> phases;

  static PrecisionSchedule all_dp();
  /// SP for the multiply and eigensolver steps through step `steps`, then DP.
  static PrecisionSchedule sp_until(int steps);
  /// SP triangular inversion for the whole cycle.
  static PrecisionSchedule sp_invert();

  const PrecisionPhase* phase_for(int step) const;
};

struct ScfAutotune {
  AutotuneState* state = nullptr;
  /// Maximum combinations timed during this cycle; negative means no limit.
  std::int64_t budget = -1;
};

struct ScfStepRecord {
  int step = 0;
  double energy = 0;
  double density_delta = 0;
  std::int64_t wall_ns = 0;
  std::string params_hash;
  std::string params;
};

struct ScfTrace {
  std::vector<ScfStepRecord> steps;
  bool converged = false;
  double final_energy = 0;
  Vector<double> final_rho;
};

/// Hash of the complete effective parameter map of a handle.
std::string params_hash(const Solver& h);

/// Iterates scf_step from rho = 0 until the density change drops below
/// `tol` (max norm) or `max_iter` steps ran. Sets na and nev on `h`.
ScfTrace run_scf(const ScfProblem& p, Solver& h, int max_iter, double tol,
                 const PrecisionSchedule& schedule, std::optional<ScfAutotune> autotune = {});

/// Runs SCF cycles on `p` while `h` autotunes, until the sweep of `level`
/// has timed every combination or `max_cycles` cycles ran. The best setting
/// is applied to `h` on return.
AutotuneState tune_across_cycles(const ScfProblem& p, Solver& h, AutotuneLevel level, int max_iter,
                                 double tol, const PrecisionSchedule& schedule,
                                 int max_cycles = 1000);

struct TransferRow {
  int instance = 0;
  std::string handle;
  int steps = 0;
  bool converged = false;
  double mean_step_ms = 0;
  double max_step_ms = 0;
  double max_residual = 0;       // max over steps of ||AV - BV Lambda||_F / (n eps ||A||_F)
  double max_orthogonality = 0;  // max over steps of ||V^T B V - I||_max / (n eps)
};

/// Runs one SCF cycle per perturbed copy of `base` under each handle.
/// Instance i perturbs H0 by symmetric noise (seed base.seed + 1000 + i) of
/// magnitude displacement * ||H0||_F / n. The two handles alternate step by
/// step so both see the same machine conditions.
std::vector<TransferRow> transferability_experiment(const ScfProblem& base, int n_perturbed,
                                                    double displacement, Solver& h_default,
                                                    Solver& h_tuned, int max_iter = 100,
                                                    double tol = 1e-10);

}  // namespace evp
