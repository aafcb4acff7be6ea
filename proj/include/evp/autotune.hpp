#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evp/solver.hpp"

namespace evp {

enum class AutotuneLevel { fast, medium };

std::string_view to_string(AutotuneLevel level);
AutotuneLevel parse_autotune_level(std::string_view text);  // throws ArgumentError

/// Parameters swept by a level, in axis order (the last axis varies fastest).
std::vector<std::string> level_parameters(AutotuneLevel level);

struct AutotuneAxis {
  std::string name;
  std::vector<ParamValue> values;
};

struct AutotuneTiming {
  std::int64_t index = 0;
  std::int64_t nanoseconds = 0;
};

/// Exhaustive sweep over the cartesian product of the axes.
///
/// `cursor` counts the combinations already timed. After autotune_step()
/// applies combination `cursor`, the next solve on the handle is timed
/// through the shared probe and recorded on the following step.
struct AutotuneState {
  AutotuneLevel level = AutotuneLevel::fast;
  std::int64_t na = 0;
  std::vector<AutotuneAxis> axes;
  std::int64_t cursor = 0;
  std::vector<AutotuneTiming> timings;
  std::optional<std::int64_t> best_index;
  bool finished = false;
  bool pending = false;
  std::shared_ptr<TimingProbe> probe;

  std::int64_t combinations() const;
  /// Values of combination `index`, one per axis.
  std::vector<std::pair<std::string, ParamValue>> combination(std::int64_t index) const;
};

/// Axes are the level's parameters minus any the user set explicitly.
AutotuneState autotune_setup(Solver& h, AutotuneLevel level);

/// Records the pending timing, if any, then applies the next combination
/// and returns true, or marks the sweep finished and returns false.
bool autotune_step(Solver& h, AutotuneState& state);

/// Applies the fastest combination recorded so far (ties go to the lower index).
void autotune_set_best(Solver& h, AutotuneState& state);

struct ConfirmedTiming {
  std::int64_t index = 0;
  std::int64_t sweep_ns = 0;
  std::int64_t median_ns = 0;
};

/// Re-times the `top` fastest recorded combinations `repeats` times each,
/// round-robin, through `solve` (which must run one solve on `h`). Applies
/// the combination with the lowest median and returns the candidates in
/// sweep rank order.
std::vector<ConfirmedTiming> autotune_confirm(Solver& h, AutotuneState& state, int top, int repeats,
                                              const std::function<void(Solver&)>& solve);

/// One line per timed combination, best marked with '*'.
std::string autotune_report(const AutotuneState& state);

void autotune_save_state(AutotuneState& state, const std::filesystem::path& path);
std::string autotune_state_text(AutotuneState& state);

/// Restores a snapshot for `h`. The snapshot must match the handle's order
/// and the axes the handle would sweep now; otherwise AutotuneError.
AutotuneState autotune_load_state(Solver& h, const std::filesystem::path& path);
AutotuneState autotune_state_from_text(Solver& h, std::string_view text);

}  // namespace evp
