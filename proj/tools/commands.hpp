#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace evp::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitParameter = 3;
inline constexpr int kExitNumerical = 4;

/// Parameter sources common to all subcommands, applied in this order.
struct ParamOptions {
  std::string params_file;
  std::vector<std::string> assignments;  // name=value
  std::optional<int> solver;
  std::string kernel;
};

struct SolveOptions {
  std::string matrix;
  std::string overlap;
  bool already_decomposed = false;
  std::int64_t nev = 0;
  std::string out;
  std::string vectors;
  std::string save_factor;
  std::string record;
  ParamOptions params;
};

struct BenchOptions {
  std::int64_t n = 0;
  std::uint64_t seed = 1;
  int repeats = 3;
  std::optional<std::int64_t> nev;
  std::string out;
  ParamOptions params;
};

struct TuneOptions {
  std::string level;
  std::int64_t n = 0;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> nev;
  std::string snapshot;
  std::string resume;
  int max_steps = -1;
  int confirm = 0;
  int confirm_repeats = 5;
  std::string best;
  std::string csv;
  ParamOptions params;
};

struct ScfOptions {
  std::int64_t n = 128;
  std::int64_t k = 16;
  double alpha = 0.1;
  double mu = 0.1;
  double mix = 0.5;
  std::uint64_t seed = 3;
  int max_iter = 100;
  double tol = 1e-10;
  std::optional<int> sp_until;
  bool sp_invert = false;
  std::string autotune;
  int transfer = 0;
  double displacement = 0.01;
  std::string out;
  std::string transfer_out;
  ParamOptions params;
};

int run_solve(const SolveOptions& o, const std::string& command_line);
int run_bench(const BenchOptions& o, const std::string& command_line);
int run_tune(const TuneOptions& o, const std::string& command_line);
int run_scf_command(const ScfOptions& o, const std::string& command_line);

}  // namespace evp::cli
