#include "evp/instrument.hpp"

namespace evp {
namespace flops {
namespace {
thread_local std::uint64_t counter = 0;
}

void add(std::uint64_t n) noexcept { counter += n; }
std::uint64_t count() noexcept { return counter; }

}  // namespace flops

std::shared_ptr<Clock> steady_clock() {
  static const auto clock = std::make_shared<SteadyClock>();
  return clock;
}

}  // namespace evp
