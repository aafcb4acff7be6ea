#include "evp/scf.hpp"

#include <Eigen/Core>

#include "evp/generalized.hpp"

namespace evp {

namespace {

double max_abs_diff(const Vector<double>& a, const Vector<double>& b) {
  double m = 0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void apply_phase(Solver& h, const PrecisionPhase& phase) {
  h.set("step_precision_cholesky", phase.cholesky);
  h.set("step_precision_invert", phase.invert);
  h.set("step_precision_multiply", phase.multiply);
  h.set("step_precision_esolve", phase.esolve);
}

std::string params_line(const Solver& h) {
  std::string s;
  for (const auto& [k, v] : h.parameters().items()) {
    if (!s.empty()) s += ';';
    s += k + "=" + v;
  }
  return s;
}

// One SCF cycle advanced a step at a time.
class Cycle {
 public:
  Cycle(const ScfProblem& p, Solver& h) : p_(p), h_(h), rho_(Vector<double>::Zero(p.n)), b_(p.b) {
    h_.set("na", static_cast<std::int64_t>(p.n));
    h_.set("nev", static_cast<std::int64_t>(p.k));
    h_.setup();
  }

  ScfStepRecord advance() {
    ++step_;
    auto r = scf_step(p_, rho_, h_, b_, step_ > 1);
    ScfStepRecord rec;
    rec.step = step_;
    rec.energy = r.energy;
    rec.density_delta = max_abs_diff(r.rho, rho_);
    rec.wall_ns = h_.last_solve_ns();
    rec.params = params_line(h_);
    rec.params_hash = fnv1a_hex(rec.params);
    rho_ = std::move(r.rho);
    last_ = std::move(r.report);
    return rec;
  }

  int step() const noexcept { return step_; }
  const Vector<double>& rho() const noexcept { return rho_; }
  const SolveReport& last_report() const noexcept { return last_; }

 private:
  const ScfProblem& p_;
  Solver& h_;
  Vector<double> rho_;
  Matrix<double> b_;
  SolveReport last_;
  int step_ = 0;
};

}  // namespace

ScfProblem build_problem(Index n, Index k, std::uint64_t seed, double alpha, double mu, double mix) {
  if (n < 1) throw ArgumentError("build_problem: n must be >= 1");
  if (k < 1 || k > n) throw ArgumentError("build_problem: k must be in [1, n]");
  if (!(alpha >= 0)) throw ArgumentError("build_problem: alpha must be >= 0");
  if (!(mu >= 0 && mu <= 0.3)) throw ArgumentError("build_problem: mu must be in [0, 0.3]");
  if (!(mix > 0 && mix <= 1)) throw ArgumentError("build_problem: mix must be in (0, 1]");
  ScfProblem p;
  p.n = n;
  p.k = k;
  p.seed = seed;
  p.alpha = alpha;
  p.mu = mu;
  p.mix = mix;
  Spectrum spectrum(n);
  for (Index i = 0; i < n; ++i) spectrum[i] = static_cast<double>(i + 1);
  p.h0 = make_symmetric_with_spectrum(n, spectrum, seed);
  p.b = Matrix<double>::Identity(n, n);
  for (Index i = 0; i + 1 < n; ++i) p.b(i + 1, i) = p.b(i, i + 1) = mu;
  cholesky_factor(p.b);  // throws NotPositiveDefinite
  return p;
}

Matrix<double> scf_hamiltonian(const ScfProblem& p, const Vector<double>& rho) {
  if (rho.size() != p.n) throw ArgumentError("scf: density has the wrong length");
  Matrix<double> a = p.h0;
  for (Index i = 0; i < p.n; ++i) a(i, i) += p.alpha * rho[i];
  return a;
}

ScfStepResult scf_step(const ScfProblem& p, const Vector<double>& rho_prev, Solver& h,
                       Matrix<double>& b_storage, bool b_decomposed) {
  const Matrix<double> a = scf_hamiltonian(p, rho_prev);
  ScfStepResult out;
  out.report = h.generalized_eigenvectors(a, b_storage, b_decomposed);
  const auto& ep = out.report.eigenpairs;
  if (ep.count() < p.k) throw StateError("scf_step: handle returned fewer than k eigenvectors");
  out.energy = 0;
  for (Index j = 0; j < p.k; ++j) out.energy += ep.values[j];
  out.rho.resize(p.n);
  for (Index i = 0; i < p.n; ++i) {
    double s = 0;
    for (Index j = 0; j < p.k; ++j) s += ep.vectors(i, j) * ep.vectors(i, j);
    out.rho[i] = (1 - p.mix) * rho_prev[i] + p.mix * s;
  }
  return out;
}

PrecisionSchedule PrecisionSchedule::all_dp() { return {{PrecisionPhase{}}}; }

PrecisionSchedule PrecisionSchedule::sp_until(int steps) {
  PrecisionPhase sp;
  sp.multiply = "sp";
  sp.esolve = "sp";
  PrecisionPhase dp;
  dp.from_step = steps + 1;
  return {{sp, dp}};
}

PrecisionSchedule PrecisionSchedule::sp_invert() {
  PrecisionPhase p;
  p.invert = "sp";
  return {{p}};
}

const PrecisionPhase* PrecisionSchedule::phase_for(int step) const {
  const PrecisionPhase* found = nullptr;
  for (const auto& ph : phases)
    if (ph.from_step <= step && (!found || ph.from_step >= found->from_step)) found = &ph;
  return found;
}

std::string params_hash(const Solver& h) { return fnv1a_hex(params_line(h)); }

ScfTrace run_scf(const ScfProblem& p, Solver& h, int max_iter, double tol,
                 const PrecisionSchedule& schedule, std::optional<ScfAutotune> autotune) {
  if (!(tol > 0)) throw ArgumentError("run_scf: tol must be positive");
  Cycle cycle(p, h);
  ScfTrace trace;
  std::int64_t tuned = 0;
  bool best_applied = false;

  for (int t = 1; t <= max_iter; ++t) {
    if (const auto* phase = schedule.phase_for(t)) apply_phase(h, *phase);
    if (autotune && autotune->state && !best_applied) {
      auto& st = *autotune->state;
      const bool within_budget = autotune->budget < 0 || tuned < autotune->budget;
      if (within_budget && autotune_step(h, st)) {
        ++tuned;
      } else if (!st.timings.empty() || st.pending) {
        autotune_set_best(h, st);
        best_applied = true;
      }
    }
    auto rec = cycle.advance();
    const bool done = rec.density_delta < tol;
    trace.steps.push_back(std::move(rec));
    if (done) {
      trace.converged = true;
      break;
    }
  }
  if (autotune && autotune->state && !best_applied && autotune->state->pending)
    autotune_set_best(h, *autotune->state);

  trace.final_energy = trace.steps.empty() ? 0.0 : trace.steps.back().energy;
  trace.final_rho = cycle.rho();
  return trace;
}

AutotuneState tune_across_cycles(const ScfProblem& p, Solver& h, AutotuneLevel level, int max_iter,
                                 double tol, const PrecisionSchedule& schedule, int max_cycles) {
  h.set("na", static_cast<std::int64_t>(p.n));
  h.set("nev", static_cast<std::int64_t>(p.k));
  h.setup();
  AutotuneState st = autotune_setup(h, level);
  for (int c = 0; c < max_cycles && !st.finished; ++c)
    run_scf(p, h, max_iter, tol, schedule, ScfAutotune{&st, -1});
  if (!st.timings.empty()) autotune_set_best(h, st);
  return st;
}

std::vector<TransferRow> transferability_experiment(const ScfProblem& base, int n_perturbed,
                                                    double displacement, Solver& h_default,
                                                    Solver& h_tuned, int max_iter, double tol) {
  if (n_perturbed < 0) throw ArgumentError("transferability_experiment: negative instance count");
  const double scale = displacement * frobenius_norm(base.h0) / static_cast<double>(base.n);
  const double eps = unit_roundoff<double>();
  std::vector<TransferRow> rows;

  for (int inst = 0; inst < n_perturbed; ++inst) {
    ScfProblem p = base;
    SplitMix64 rng(base.seed + 1000 + static_cast<std::uint64_t>(inst));
    for (Index j = 0; j < p.n; ++j)
      for (Index i = j; i < p.n; ++i) {
        const double v = scale * rng.symmetric_uniform();
        p.h0(i, j) += v;
        if (i != j) p.h0(j, i) = p.h0(i, j);
      }

    const char* labels[2] = {"default", "tuned"};
    std::vector<Cycle> cycles;
    cycles.reserve(2);
    cycles.emplace_back(p, h_default);
    cycles.emplace_back(p, h_tuned);
    TransferRow out[2];
    bool done[2] = {false, false};
    std::int64_t total_ns[2] = {0, 0};

    for (int t = 1; t <= max_iter && !(done[0] && done[1]); ++t) {
      for (int hdl = 0; hdl < 2; ++hdl) {
        if (done[hdl]) continue;
        auto& cyc = cycles[static_cast<std::size_t>(hdl)];
        const Matrix<double> a = scf_hamiltonian(p, cyc.rho());
        const auto rec = cyc.advance();
        total_ns[hdl] += rec.wall_ns;
        auto& row = out[hdl];
        row.steps = rec.step;
        row.max_step_ms = std::max(row.max_step_ms, static_cast<double>(rec.wall_ns) * 1e-6);

        const auto& ep = cyc.last_report().eigenpairs;
        const Matrix<double>& v = ep.vectors;
        const Matrix<double> bv = p.b * v;
        const Matrix<double> r = a * v - bv * ep.values.head(v.cols()).asDiagonal();
        const double n_eps = static_cast<double>(p.n) * eps;
        row.max_residual = std::max(row.max_residual, r.norm() / (n_eps * a.norm()));
        const Matrix<double> g = v.transpose() * bv - Matrix<double>::Identity(v.cols(), v.cols());
        row.max_orthogonality = std::max(row.max_orthogonality, g.cwiseAbs().maxCoeff() / n_eps);
        if (rec.density_delta < tol) {
          row.converged = true;
          done[hdl] = true;
        }
      }
    }
    for (int hdl = 0; hdl < 2; ++hdl) {
      out[hdl].instance = inst;
      out[hdl].handle = labels[hdl];
      out[hdl].mean_step_ms =
          out[hdl].steps > 0 ? static_cast<double>(total_ns[hdl]) * 1e-6 / out[hdl].steps : 0.0;
      rows.push_back(out[hdl]);
    }
  }
  return rows;
}

}  // namespace evp
