#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace uavirl {

// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Per-component seed fan-out: hash of (master, component name, index).
std::uint64_t derive_seed(std::uint64_t master, std::string_view component, std::uint64_t index = 0);

// Seeded generator with platform-independent sampling helpers. The standard
// distributions are implementation-defined, so conversions are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace uavirl
