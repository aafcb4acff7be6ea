#pragma once

#include <chrono>
#include <cstdint>
#include <memory>

namespace evp {

// Per-thread floating-point operation counter. Kernels add their analytic
// operation count once per call, outside any parallel region.
namespace flops {

void add(std::uint64_t count) noexcept;
std::uint64_t count() noexcept;

/// Captures the number of flops counted on this thread during its lifetime.
class Scope {
 public:
  Scope() noexcept : start_(count()) {}
  std::uint64_t elapsed() const noexcept { return count() - start_; }

 private:
  std::uint64_t start_;
};

}  // namespace flops

/// Monotonic time source in nanoseconds. Replaceable for deterministic tests.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ns() = 0;
};

class SteadyClock final : public Clock {
 public:
  std::int64_t now_ns() override {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
};

std::shared_ptr<Clock> steady_clock();

}  // namespace evp
