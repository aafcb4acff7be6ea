#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evp/instrument.hpp"
#include "evp/matrix.hpp"
#include "evp/parameters.hpp"
#include "evp/tridiag_solver.hpp"

namespace evp {

/// Pipeline stages reported by a solve. A stage that the chosen path does
/// not run reports zero time and zero flops.
enum class Stage : int { cholesky, invert, reduce, tridiag, solve, back2, back1, backgen };

inline constexpr int kStageCount = 8;
inline constexpr std::array<std::string_view, kStageCount> kStageNames{
    "cholesky", "invert", "reduce", "tridiag", "solve", "back2", "back1", "backgen"};

struct SolveReport {
  EigenPairs<double> eigenpairs;
  std::array<double, kStageCount> seconds{};
  std::array<std::uint64_t, kStageCount> flops{};
  double total_seconds = 0;

  double stage_seconds(Stage s) const noexcept { return seconds[static_cast<int>(s)]; }
  std::uint64_t stage_flops(Stage s) const noexcept { return flops[static_cast<int>(s)]; }
};

/// Receives the wall time of the first solve after it is armed. The
/// autotuner shares one with the handle it drives.
struct TimingProbe {
  bool armed = false;
  std::optional<std::int64_t> sample_ns;
};

enum class SolverState { created, ready, deallocated };

/// One eigensolver instance: a parameter store plus the solve entry points.
/// Handles share nothing, so several may be configured and used side by side.
class Solver {
 public:
  explicit Solver(const ParameterRegistry& registry = default_registry());

  void set(std::string_view name, std::int64_t value);
  void set(std::string_view name, int value) { set(name, static_cast<std::int64_t>(value)); }
  void set(std::string_view name, bool value);
  void set(std::string_view name, std::string_view value);
  void set(std::string_view name, const char* value) { set(name, std::string_view(value)); }
  /// Used by the autotuner; records the value with provenance `tuned`.
  void set_tuned(std::string_view name, const ParamValue& value);

  ParamValue get(std::string_view name) const;
  std::int64_t get_int(std::string_view name) const;
  std::string get_string(std::string_view name) const;
  /// The value in parameter-file text form.
  std::string get_text(std::string_view name) const;
  bool is_user_set(std::string_view name) const;
  const ParameterStore& parameters() const;

  /// Validates required and mutually dependent parameters; moves to ready.
  void setup();
  SolverState state() const noexcept { return state_; }

  /// Standard problem A V = V Lambda for the lowest nev pairs.
  SolveReport eigenvectors(const Matrix<double>& a);

  /// Generalized problem A V = B V Lambda. With is_already_decomposed false,
  /// B must be SPD and is overwritten by the inverse of its Cholesky factor.
  /// With it true, B is taken to hold that inverse already and is not checked.
  SolveReport generalized_eigenvectors(const Matrix<double>& a, Matrix<double>& b,
                                       bool is_already_decomposed);

  void store(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);
  std::string print() const;

  void deallocate();

  void set_clock(std::shared_ptr<Clock> clock);
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  std::int64_t solve_count() const noexcept { return solve_count_; }
  std::int64_t last_solve_ns() const noexcept { return last_solve_ns_; }
  void attach_probe(std::shared_ptr<TimingProbe> probe);

  /// band_width after clamping to na - 1.
  Index effective_band_width() const;

 private:
  void require_live() const;
  void require_ready() const;
  void after_set(std::string_view name);
  void warn(std::string message);
  SolveReport run(const Matrix<double>& a, Matrix<double>* b, bool decomposed);

  ParameterStore params_;
  SolverState state_ = SolverState::created;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<TimingProbe> probe_;
  std::vector<std::string> warnings_;
  std::int64_t solve_count_ = 0;
  std::int64_t last_solve_ns_ = 0;
};

/// Fresh handle with registry defaults.
std::unique_ptr<Solver> allocate();
/// Releases a handle obtained from allocate().
void deallocate(std::unique_ptr<Solver>& handle);
/// Library-wide teardown; safe to call more than once.
void uninit();

}  // namespace evp
