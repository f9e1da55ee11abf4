#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lotwatch {

// Seeded generator with output that is identical on every platform.
//
// The engine is std::mt19937_64, whose sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so the
// mapping to integers (rejection sampling on the raw 64-bit output) and to
// Gaussians (Box-Muller on two 53-bit uniforms) is done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1).
  double unit();

  // Standard normal deviate.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// 64-bit FNV-1a; used to derive per-capture seeds from stable identifiers.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag);

}  // namespace lotwatch
