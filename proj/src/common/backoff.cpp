#include "common/backoff.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace lotwatch {

double scheduled_delay(const RetryPolicy& policy, int failures) {
  if (failures < 1) return 0.0;
  const double raw = policy.base_delay_s * std::pow(policy.factor, failures - 1);
  return std::min(policy.cap_s, raw);
}

double jittered_delay(const RetryPolicy& policy, int failures, Rng& rng) {
  return rng.unit() * scheduled_delay(policy, failures);
}

Sleeper real_sleeper() {
  return [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

}  // namespace lotwatch
