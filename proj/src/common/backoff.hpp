#pragma once

#include <chrono>
#include <functional>

#include "common/rng.hpp"

namespace lotwatch {

// Exponential backoff with full jitter, shared by the LMM client and the
// webhook dispatcher.
struct RetryPolicy {
  int max_attempts = 8;
  double base_delay_s = 0.5;
  double factor = 2.0;
  double cap_s = 8.0;
};

// Delay scheduled after the given number of consecutive failures (>= 1):
// min(cap, base * factor^(failures - 1)). Non-decreasing in failures.
double scheduled_delay(const RetryPolicy& policy, int failures);

// Full jitter: uniform in [0, scheduled_delay].
double jittered_delay(const RetryPolicy& policy, int failures, Rng& rng);

using Sleeper = std::function<void(std::chrono::duration<double>)>;

Sleeper real_sleeper();

}  // namespace lotwatch
