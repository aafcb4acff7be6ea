#pragma once

namespace evp {

/// Number of worker threads used by the parallel kernels (always >= 1).
int worker_count() noexcept;

/// Caps the worker count; 0 selects the runtime default.
void set_worker_count(int workers) noexcept;

/// Reads EVP_THREADS from the environment and applies it (0 or unset = auto).
void configure_workers_from_env();

}  // namespace evp
