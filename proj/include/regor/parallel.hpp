#pragma once

namespace regor {

/// Applies the REGOR_THREADS environment variable (if set and positive) to the
/// OpenMP runtime. Returns the worker count in effect afterwards.
int configure_threads_from_env();

/// Current OpenMP worker bound (1 when built without OpenMP).
int max_threads();

void set_max_threads(int threads);

}  // namespace regor
