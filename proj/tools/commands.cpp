#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>

#include "evp/autotune.hpp"
#include "evp/matrix_io.hpp"
#include "evp/scf.hpp"
#include "evp/solver.hpp"

namespace evp::cli {

namespace {

// stdout unless a path is given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw FormatError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void apply_params(Solver& h, const ParamOptions& o) {
  if (!o.params_file.empty()) h.load(o.params_file);
  for (const auto& a : o.assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ParameterError("--set expects name=value, got '" + a + "'");
    h.set(a.substr(0, eq), std::string_view(a).substr(eq + 1));
  }
  if (o.solver) h.set("solver", static_cast<std::int64_t>(*o.solver));
  if (!o.kernel.empty()) h.set("kernel", o.kernel);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

struct Diagnostics {
  double residual = 0;       // ||AV - BV Lambda||_F / (n eps ||A||_F)
  double orthogonality = 0;  // ||V^T B V - I||_max / (n eps)
};

Diagnostics diagnose(const Matrix<double>& a, const Matrix<double>* b, const SolveReport& r) {
  Diagnostics d;
  const auto& v = r.eigenpairs.vectors;
  if (v.cols() == 0) return d;
  const double n_eps = static_cast<double>(a.rows()) * unit_roundoff<double>();
  const Matrix<double> bv = b ? Matrix<double>(*b * v) : v;
  const Matrix<double> res = a * v - bv * r.eigenpairs.values.head(v.cols()).asDiagonal();
  d.residual = res.norm() / (n_eps * std::max(a.norm(), 1e-300));
  const Matrix<double> g = v.transpose() * bv - Matrix<double>::Identity(v.cols(), v.cols());
  d.orthogonality = g.cwiseAbs().maxCoeff() / n_eps;
  return d;
}

void write_stage_header(std::ostream& os, const char* suffix) {
  for (auto name : kStageNames) os << "," << name << suffix;
}

}  // namespace

int run_solve(const SolveOptions& o, const std::string& command_line) {
  const auto af = read_matrix_file(o.matrix);
  const Matrix<double> a = af.to_double();
  if (!is_symmetric(a)) throw FormatError(o.matrix + ": matrix is not symmetric");

  Solver h;
  apply_params(h, o.params);
  h.set("na", static_cast<std::int64_t>(a.rows()));
  h.set("nev", o.nev);
  h.setup();

  SolveReport report;
  Matrix<double> b_original;
  Matrix<double> b;
  const bool generalized = !o.overlap.empty();
  if (generalized) {
    b = read_matrix_file(o.overlap).to_double();
    if (b.rows() != a.rows()) throw FormatError(o.overlap + ": order does not match the matrix");
    b_original = b;
    report = h.generalized_eigenvectors(a, b, o.already_decomposed);
    if (!o.save_factor.empty()) write_matrix_file(o.save_factor, b, false);
  } else {
    if (o.already_decomposed) throw ParameterError("--already-decomposed requires --overlap");
    report = h.eigenvectors(a);
  }

  {
    Output out(o.out);
    auto& os = out.stream();
    os << "index,eigenvalue\n";
    for (Index i = 0; i < report.eigenpairs.values.size(); ++i)
      os << i << "," << fmt("%.17g", report.eigenpairs.values[i]) << "\n";
  }
  if (!o.vectors.empty()) write_vector_file(o.vectors, report.eigenpairs.vectors);

  // The overlap matrix is only meaningful for diagnostics when it was not
  // already replaced by a factor before this run.
  Diagnostics diag;
  if (!generalized)
    diag = diagnose(a, nullptr, report);
  else if (!o.already_decomposed)
    diag = diagnose(a, &b_original, report);

  std::cerr << "solved n=" << a.rows() << " nev=" << o.nev << " solver=" << h.get_text("solver")
            << " kernel=" << h.get_text("kernel") << " in " << fmt("%.6f", report.total_seconds) << " s\n";
  for (int s = 0; s < kStageCount; ++s)
    if (report.seconds[s] > 0)
      std::cerr << "  " << kStageNames[s] << ": " << fmt("%.6f", report.seconds[s]) << " s\n";
  for (const auto& w : h.warnings()) std::cerr << "warning: " << w << "\n";

  if (!o.record.empty()) {
    Output rec(o.record);
    auto& os = rec.stream();
    os << "command,status,n,nev,params_hash,params";
    write_stage_header(os, "_s");
    os << ",total_s,residual,orthogonality\n";
    std::string cmd = command_line;
    std::replace(cmd.begin(), cmd.end(), ',', ' ');
    std::replace(cmd.begin(), cmd.end(), '"', '\'');
    std::string params;
    for (const auto& [name, value] : h.parameters().items())
      params += (params.empty() ? "" : ";") + name + "=" + value;
    os << '"' << cmd << "\",0," << a.rows() << "," << o.nev << "," << params_hash(h) << "," << params;
    for (double s : report.seconds) os << "," << fmt("%.9f", s);
    os << "," << fmt("%.9f", report.total_seconds) << "," << fmt("%.6g", diag.residual) << ","
       << fmt("%.6g", diag.orthogonality) << "\n";
  }
  return kExitOk;
}

int run_bench(const BenchOptions& o, const std::string&) {
  if (o.n < 1) throw ParameterError("--n must be >= 1");
  if (o.repeats < 1) throw ParameterError("--repeats must be >= 1");
  Solver h;
  apply_params(h, o.params);
  h.set("na", o.n);
  h.set("nev", o.nev.value_or(o.n));
  h.setup();
  const Matrix<double> a = random_symmetric(o.n, o.seed);

  Output out(o.out);
  auto& os = out.stream();
  os << "run,n,nev,solver,kernel,band_width";
  write_stage_header(os, "_s");
  os << ",total_s,stage_sum_s";
  write_stage_header(os, "_flops");
  os << ",back_flops\n";

  std::vector<std::array<double, kStageCount + 2>> times;
  std::array<std::uint64_t, kStageCount> flops{};
  auto prefix = [&](const std::string& run) {
    os << run << "," << o.n << "," << h.get_text("nev") << "," << h.get_text("solver") << ","
       << h.get_text("kernel") << "," << h.effective_band_width();
  };
  auto flop_columns = [&] {
    for (auto f : flops) os << "," << f;
    os << "," << flops[static_cast<int>(Stage::back1)] + flops[static_cast<int>(Stage::back2)] << "\n";
  };

  for (int r = 0; r < o.repeats; ++r) {
    const auto rep = h.eigenvectors(a);
    std::array<double, kStageCount + 2> t{};
    double sum = 0;
    for (int s = 0; s < kStageCount; ++s) {
      t[static_cast<std::size_t>(s)] = rep.seconds[s];
      sum += rep.seconds[s];
    }
    t[kStageCount] = rep.total_seconds;
    t[kStageCount + 1] = sum;
    times.push_back(t);
    flops = rep.flops;
    prefix(std::to_string(r + 1));
    for (double x : t) os << "," << fmt("%.9f", x);
    flop_columns();
  }
  for (const char* label : {"min", "median"}) {
    prefix(label);
    for (std::size_t c = 0; c < kStageCount + 2; ++c) {
      std::vector<double> col;
      for (const auto& t : times) col.push_back(t[c]);
      const double v = std::string(label) == "min" ? *std::min_element(col.begin(), col.end()) : median(col);
      os << "," << fmt("%.9f", v);
    }
    flop_columns();
  }
  return kExitOk;
}

int run_tune(const TuneOptions& o, const std::string&) {
  if (o.n < 1) throw ParameterError("--n must be >= 1");
  Solver h;
  apply_params(h, o.params);
  h.set("na", o.n);
  h.set("nev", o.nev.value_or(o.n));
  h.setup();
  const Matrix<double> a = random_symmetric(o.n, o.seed);

  AutotuneState st;
  if (!o.resume.empty()) {
    st = autotune_load_state(h, o.resume);
    if (!o.level.empty() && parse_autotune_level(o.level) != st.level)
      throw AutotuneError("--level " + o.level + " does not match the resumed snapshot");
  } else {
    if (o.level.empty()) throw ParameterError("--level is required unless --resume is given");
    AutotuneLevel level;
    try {
      level = parse_autotune_level(o.level);
    } catch (const ArgumentError& e) {
      throw ParameterError(e.what());
    }
    st = autotune_setup(h, level);
  }

  int steps = 0;
  while (o.max_steps < 0 || steps < o.max_steps) {
    if (!autotune_step(h, st)) break;
    h.eigenvectors(a);
    ++steps;
  }
  // a final step records the last timing and detects completion
  if (!st.finished && st.pending && st.cursor + 1 == st.combinations()) autotune_step(h, st);
  if (!o.snapshot.empty()) autotune_save_state(st, o.snapshot);

  std::cout << autotune_report(st);
  if (!st.finished) {
    std::cout << "sweep interrupted after " << st.cursor << " of " << st.combinations()
              << " combinations" << (o.snapshot.empty() ? "" : "; snapshot written to " + o.snapshot) << "\n";
    return kExitOk;
  }
  autotune_set_best(h, st);

  if (o.confirm > 0) {
    const auto confirmed =
        autotune_confirm(h, st, o.confirm, o.confirm_repeats, [&](Solver& s) { s.eigenvectors(a); });
    std::cout << "confirmation (" << o.confirm_repeats << " runs each):\n";
    std::int64_t winner = confirmed.front().index;
    std::int64_t winner_ns = confirmed.front().median_ns;
    for (const auto& c : confirmed) {
      std::cout << "  " << c.index << ": sweep " << fmt("%.6f", static_cast<double>(c.sweep_ns) * 1e-9)
                << " s, median " << fmt("%.6f", static_cast<double>(c.median_ns) * 1e-9) << " s\n";
      if (c.median_ns < winner_ns) {
        winner = c.index;
        winner_ns = c.median_ns;
      }
    }
    std::cout << "confirmed best: combination " << winner << "\n";
  }

  if (!o.csv.empty()) {
    Output out(o.csv);
    auto& os = out.stream();
    os << "index,seconds";
    for (const auto& ax : st.axes) os << "," << ax.name;
    os << "\n";
    for (const auto& t : st.timings) {
      os << t.index << "," << fmt("%.9f", static_cast<double>(t.nanoseconds) * 1e-9);
      for (const auto& kv : st.combination(t.index)) os << "," << to_text(kv.second);
      os << "\n";
    }
  }
  if (!o.best.empty()) {
    h.store(o.best);
    std::cout << "best parameters written to " << o.best << "\n";
  } else {
    std::cout << h.parameters().to_text();
  }
  return kExitOk;
}

int run_scf_command(const ScfOptions& o, const std::string&) {
  if (o.sp_until && o.sp_invert) throw ParameterError("--sp-until and --sp-invert are exclusive");
  ScfProblem p;
  try {
    p = build_problem(o.n, o.k, o.seed, o.alpha, o.mu, o.mix);
  } catch (const ArgumentError& e) {
    throw ParameterError(e.what());
  }
  const PrecisionSchedule schedule = o.sp_until ? PrecisionSchedule::sp_until(*o.sp_until)
                                     : o.sp_invert ? PrecisionSchedule::sp_invert()
                                                   : PrecisionSchedule::all_dp();
  if (o.transfer < 0) throw ParameterError("--transfer must be >= 0");

  Solver h;
  apply_params(h, o.params);
  h.set("na", o.n);
  h.set("nev", o.k);
  h.setup();

  std::optional<AutotuneState> state;
  if (!o.autotune.empty()) {
    try {
      state = autotune_setup(h, parse_autotune_level(o.autotune));
    } catch (const ArgumentError& e) {
      throw ParameterError(e.what());
    }
  }
  const auto trace = run_scf(p, h, o.max_iter, o.tol, schedule,
                             state ? std::optional<ScfAutotune>(ScfAutotune{&*state, -1}) : std::nullopt);
  {
    Output out(o.out);
    auto& os = out.stream();
    os << "step,energy,density_delta,wall_ms,accumulated_ms,params_hash\n";
    double acc = 0;
    for (const auto& s : trace.steps) {
      const double ms = static_cast<double>(s.wall_ns) * 1e-6;
      acc += ms;
      os << s.step << "," << fmt("%.17g", s.energy) << "," << fmt("%.6e", s.density_delta) << ","
         << fmt("%.6f", ms) << "," << fmt("%.6f", acc) << "," << s.params_hash << "\n";
    }
    os << "# converged=" << (trace.converged ? "true" : "false") << " steps=" << trace.steps.size()
       << " energy=" << fmt("%.17g", trace.final_energy) << "\n";
    if (state) os << "# autotune timed " << state->timings.size() << " of " << state->combinations() << "\n";
  }

  if (o.transfer > 0) {
    Solver tuned;
    apply_params(tuned, o.params);
    const auto level = o.autotune.empty() ? AutotuneLevel::fast : parse_autotune_level(o.autotune);
    tune_across_cycles(p, tuned, level, o.max_iter, o.tol, schedule);
    Solver fallback;
    apply_params(fallback, o.params);
    const auto rows = transferability_experiment(p, o.transfer, o.displacement, fallback, tuned, o.max_iter, o.tol);

    Output out(o.transfer_out);
    auto& os = out.stream();
    os << "instance,handle,steps,converged,mean_step_ms,max_step_ms,max_residual,max_orthogonality\n";
    for (const auto& r : rows)
      os << r.instance << "," << r.handle << "," << r.steps << "," << (r.converged ? "true" : "false") << ","
         << fmt("%.6f", r.mean_step_ms) << "," << fmt("%.6f", r.max_step_ms) << "," << fmt("%.4g", r.max_residual)
         << "," << fmt("%.4g", r.max_orthogonality) << "\n";
    for (const char* label : {"default", "tuned"}) {
      double sum = 0, worst = 0;
      int count = 0;
      for (const auto& r : rows)
        if (r.handle == label) {
          sum += r.mean_step_ms;
          worst = std::max(worst, r.max_step_ms);
          ++count;
        }
      os << "# " << label << " mean_step_ms=" << fmt("%.6f", count ? sum / count : 0.0)
         << " max_step_ms=" << fmt("%.6f", worst) << "\n";
    }
  }
  return kExitOk;
}

}  // namespace evp::cli
