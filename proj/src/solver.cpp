#include "evp/solver.hpp"

#include <fstream>
#include <sstream>

#include "evp/generalized.hpp"
#include "evp/parallel.hpp"
#include "evp/twostage.hpp"

namespace evp {

namespace {

struct Config {
  Index na = 0;
  Index nev = 0;
  int solver = 2;
  const KernelVariant* kernel = nullptr;
  Index band_width = 32;
  Index tridiag_block = 64;
  Index backtransform_block = 32;
  Index cholesky_block = 64;
  ConvertMethod convert = ConvertMethod::elementwise;
  Precision cholesky = Precision::dp;
  Precision invert = Precision::dp;
  Precision multiply = Precision::dp;
  Precision esolve = Precision::dp;
};

Precision parse_precision(const std::string& s) { return s == "sp" ? Precision::sp : Precision::dp; }

template <typename S>
Matrix<S> to_working(const Matrix<double>& m, ConvertMethod method) {
  if constexpr (std::is_same_v<S, double>) {
    return m;
  } else {
    return convert_precision<S>(m, method);
  }
}

template <typename S>
Matrix<double> to_double(Matrix<S> m, ConvertMethod method) {
  if constexpr (std::is_same_v<S, double>) {
    return m;
  } else {
    return convert_precision<double>(m, method);
  }
}

// Accumulates wall time and flops of one stage into the report.
class StageTimer {
 public:
  StageTimer(Clock& clock, SolveReport& report) : clock_(clock), report_(report) {}

  template <typename F>
  decltype(auto) operator()(Stage stage, F&& f) {
    const auto i = static_cast<int>(stage);
    const std::int64_t t0 = clock_.now_ns();
    const flops::Scope scope;
    struct Commit {
      StageTimer& t;
      int i;
      std::int64_t t0;
      const flops::Scope& scope;
      ~Commit() {
        t.report_.seconds[i] += static_cast<double>(t.clock_.now_ns() - t0) * 1e-9;
        t.report_.flops[i] += scope.elapsed();
      }
    } commit{*this, i, t0, scope};
    return f();
  }

 private:
  Clock& clock_;
  SolveReport& report_;
};

// Steps (iii)-(iv) minus the generalized transforms: reduction to
// tridiagonal form, the tridiagonal solve and the Householder
// back-transformations, all in precision S.
template <typename S>
EigenPairs<double> standard_solve(const Matrix<double>& a_dp, const Config& cfg, StageTimer& timed) {
  const Index n = a_dp.rows();
  Matrix<S> a = timed(Stage::tridiag, [&] { return to_working<S>(a_dp, cfg.convert); });

  TridiagonalForm<S> form;
  std::vector<HouseholderSet<S>> sets;  // in application order
  Stage first_back = Stage::back1;
  if (cfg.solver == 1 || n < 3) {
    auto tri = timed(Stage::tridiag, [&] { return tridiagonalize(std::move(a), cfg.tridiag_block); });
    form = std::move(tri.form);
    sets.push_back(std::move(tri.reflectors));
  } else {
    const Index b = std::min<Index>(cfg.band_width, n - 1);
    auto band = timed(Stage::tridiag, [&] { return reduce_to_band(std::move(a), b); });
    auto chase = timed(Stage::tridiag, [&] { return band_to_tridiagonal(band.band); });
    form = std::move(chase.form);
    sets.push_back(std::move(band.reflectors));
    sets.push_back(std::move(chase.reflectors));
    first_back = Stage::back2;
  }

  auto pairs = timed(Stage::solve, [&] { return solve_tridiagonal(form, cfg.nev); });
  Matrix<S> v = std::move(pairs.vectors);
  if (cfg.nev > 0) {
    // The last reduction is undone first.
    Stage stage = first_back;
    for (auto it = sets.rbegin(); it != sets.rend(); ++it) {
      timed(stage, [&] {
        apply_reflectors_reverse(*it, v, *cfg.kernel, cfg.backtransform_block);
        return 0;
      });
      stage = Stage::back1;
    }
  }

  EigenPairs<double> out;
  out.values = pairs.values.template cast<double>();
  if (cfg.nev > 0) {
    out.vectors = timed(Stage::back1, [&] { return to_double<S>(std::move(v), cfg.convert); });
  } else {
    out.vectors.resize(n, 0);
  }
  return out;
}

EigenPairs<double> dispatch_standard(const Matrix<double>& a, const Config& cfg, StageTimer& timed) {
  if (cfg.esolve == Precision::sp) return standard_solve<float>(a, cfg, timed);
  return standard_solve<double>(a, cfg, timed);
}

template <typename S>
Matrix<double> factor_stage(Matrix<double> b, const Config& cfg) {
  auto f = cholesky_factor(to_working<S>(b, cfg.convert), cfg.cholesky_block);
  return to_double<S>(std::move(f.l), cfg.convert);
}

template <typename S>
Matrix<double> invert_stage(Matrix<double> l, const Config& cfg) {
  auto f = invert_triangular(CholeskyFactor<S>{to_working<S>(l, cfg.convert), false});
  return to_double<S>(std::move(f.l), cfg.convert);
}

template <typename S>
Matrix<double> reduce_stage(const Matrix<double>& a, const Matrix<double>& linv, const Config& cfg) {
  const CholeskyFactor<S> f{to_working<S>(linv, cfg.convert), true};
  return to_double<S>(reduce_to_standard(to_working<S>(a, cfg.convert), f), cfg.convert);
}

template <typename S>
Matrix<double> backgen_stage(const Matrix<double>& vt, const Matrix<double>& linv, const Config& cfg) {
  const CholeskyFactor<S> f{to_working<S>(linv, cfg.convert), true};
  return to_double<S>(back_transform_generalized(to_working<S>(vt, cfg.convert), f), cfg.convert);
}

}  // namespace

Solver::Solver(const ParameterRegistry& registry) : params_(registry), clock_(steady_clock()) {}

void Solver::require_live() const {
  if (state_ == SolverState::deallocated) throw StateError("solver handle used after deallocate");
}

void Solver::require_ready() const {
  require_live();
  if (state_ != SolverState::ready) throw StateError("solver handle is not set up; call setup() first");
}

void Solver::after_set(std::string_view name) {
  if ((name == "na" || name == "nev") && state_ == SolverState::ready) state_ = SolverState::created;
}

void Solver::warn(std::string message) {
  for (const auto& w : warnings_)
    if (w == message) return;
  warnings_.push_back(std::move(message));
}

void Solver::set(std::string_view name, std::int64_t value) {
  require_live();
  params_.set(name, ParamValue(value));
  after_set(name);
}

void Solver::set(std::string_view name, bool value) {
  require_live();
  params_.set(name, ParamValue(value));
  after_set(name);
}

void Solver::set(std::string_view name, std::string_view value) {
  require_live();
  const auto& d = params_.registry().find(name);
  if (d.kind == ParamKind::choice) {
    params_.set(name, ParamValue(std::string(value)));
  } else {
    params_.set_text(name, value);
  }
  after_set(name);
}

void Solver::set_tuned(std::string_view name, const ParamValue& value) {
  require_live();
  params_.set(name, value, Provenance::tuned);
  after_set(name);
}

ParamValue Solver::get(std::string_view name) const {
  require_live();
  return params_.get(name);
}

std::int64_t Solver::get_int(std::string_view name) const {
  require_live();
  return params_.get_int(name);
}

std::string Solver::get_string(std::string_view name) const {
  require_live();
  return params_.get_string(name);
}

std::string Solver::get_text(std::string_view name) const {
  require_live();
  return to_text(params_.get(name));
}

bool Solver::is_user_set(std::string_view name) const {
  require_live();
  return params_.provenance(name) == Provenance::set;
}

const ParameterStore& Solver::parameters() const {
  require_live();
  return params_;
}

Index Solver::effective_band_width() const {
  const Index na = params_.get_int("na");
  return std::max<Index>(1, std::min<Index>(params_.get_int("band_width"), na - 1));
}

void Solver::setup() {
  require_live();
  for (const auto& d : params_.registry().descriptors())
    if (d.required && !params_.has_value(d.name)) throw MissingRequired(d.name);
  const auto na = params_.get_int("na");
  const auto nev = params_.get_int("nev");
  if (nev > na)
    throw InconsistentParameters("nev = " + std::to_string(nev) + " exceeds na = " + std::to_string(na));
  const auto bw = params_.get_int("band_width");
  if (na > 1 && bw > na - 1)
    warn("band_width " + std::to_string(bw) + " clamped to " + std::to_string(na - 1) +
         " for na = " + std::to_string(na));
  state_ = SolverState::ready;
}

SolveReport Solver::eigenvectors(const Matrix<double>& a) { return run(a, nullptr, false); }

SolveReport Solver::generalized_eigenvectors(const Matrix<double>& a, Matrix<double>& b,
                                             bool is_already_decomposed) {
  return run(a, &b, is_already_decomposed);
}

SolveReport Solver::run(const Matrix<double>& a, Matrix<double>* b, bool decomposed) {
  require_ready();
  Config cfg;
  cfg.na = params_.get_int("na");
  cfg.nev = params_.get_int("nev");
  if (a.rows() != cfg.na || a.cols() != cfg.na)
    throw ArgumentError("matrix A has shape " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + ", expected order na = " + std::to_string(cfg.na));
  if (!all_finite(a)) throw ArgumentError("matrix A has non-finite entries");
  if (!is_symmetric(a)) throw ArgumentError("matrix A is not symmetric");
  if (b != nullptr && (b->rows() != cfg.na || b->cols() != cfg.na))
    throw ArgumentError("matrix B does not have order na = " + std::to_string(cfg.na));

  cfg.solver = static_cast<int>(params_.get_int("solver"));
  cfg.kernel = &find_kernel(params_.get_string("kernel"));
  cfg.band_width = params_.get_int("band_width");
  if (cfg.na > 1 && cfg.band_width > cfg.na - 1)
    warn("band_width " + std::to_string(cfg.band_width) + " clamped to " +
         std::to_string(cfg.na - 1) + " for na = " + std::to_string(cfg.na));
  cfg.tridiag_block = params_.get_int("tridiag_block");
  cfg.backtransform_block = params_.get_int("backtransform_block");
  cfg.cholesky_block = params_.get_int("cholesky_block");
  cfg.convert = params_.get_string("convert_method") == "block" ? ConvertMethod::block
                                                                 : ConvertMethod::elementwise;
  const Precision base = parse_precision(params_.get_string("precision"));
  auto step = [&](const char* key) {
    const auto& s = params_.get_string(key);
    return s == "inherit" ? base : parse_precision(s);
  };
  cfg.cholesky = step("step_precision_cholesky");
  cfg.invert = step("step_precision_invert");
  cfg.multiply = step("step_precision_multiply");
  cfg.esolve = step("step_precision_esolve");

  SolveReport report;
  StageTimer timed(*clock_, report);
  const std::int64_t start = clock_->now_ns();

  if (b == nullptr) {
    report.eigenpairs = dispatch_standard(a, cfg, timed);
  } else {
    if (!decomposed) {
      if (!all_finite(*b)) throw ArgumentError("matrix B has non-finite entries");
      if (!is_symmetric(*b)) throw ArgumentError("matrix B is not symmetric");
      Matrix<double> l = timed(Stage::cholesky, [&] {
        return cfg.cholesky == Precision::sp ? factor_stage<float>(*b, cfg) : factor_stage<double>(*b, cfg);
      });
      *b = timed(Stage::invert, [&] {
        return cfg.invert == Precision::sp ? invert_stage<float>(std::move(l), cfg)
                                           : invert_stage<double>(std::move(l), cfg);
      });
    }
    const bool sp_multiply = cfg.multiply == Precision::sp;
    const Matrix<double> at = timed(Stage::reduce, [&] {
      return sp_multiply ? reduce_stage<float>(a, *b, cfg) : reduce_stage<double>(a, *b, cfg);
    });
    report.eigenpairs = dispatch_standard(at, cfg, timed);
    if (cfg.nev > 0) {
      report.eigenpairs.vectors = timed(Stage::backgen, [&] {
        return sp_multiply ? backgen_stage<float>(report.eigenpairs.vectors, *b, cfg)
                           : backgen_stage<double>(report.eigenpairs.vectors, *b, cfg);
      });
    }
  }

  const std::int64_t elapsed = clock_->now_ns() - start;
  report.total_seconds = static_cast<double>(elapsed) * 1e-9;
  last_solve_ns_ = elapsed;
  ++solve_count_;
  if (probe_ && probe_->armed) {
    probe_->sample_ns = elapsed;
    probe_->armed = false;
  }
  return report;
}

void Solver::store(const std::filesystem::path& path) const {
  require_live();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << "# evp solver parameters\n" << params_.to_text();
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

void Solver::load(const std::filesystem::path& path) {
  require_live();
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  params_.apply_text(text.str());
  after_set("na");
}

std::string Solver::print() const {
  require_live();
  std::string out = params_.describe();
  for (const auto& w : warnings_) out += "warning: " + w + "\n";
  return out;
}

void Solver::deallocate() {
  state_ = SolverState::deallocated;
  probe_.reset();
  warnings_.clear();
}

void Solver::set_clock(std::shared_ptr<Clock> clock) {
  require_live();
  clock_ = clock ? std::move(clock) : steady_clock();
}

void Solver::attach_probe(std::shared_ptr<TimingProbe> probe) {
  require_live();
  probe_ = std::move(probe);
}

std::unique_ptr<Solver> allocate() { return std::make_unique<Solver>(); }

void deallocate(std::unique_ptr<Solver>& handle) {
  if (!handle) throw StateError("deallocate called on an empty handle");
  handle->deallocate();
  handle.reset();
}

void uninit() { set_worker_count(0); }

}  // namespace evp
