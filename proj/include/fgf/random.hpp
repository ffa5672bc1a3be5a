#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fgf {

/// Deterministic random stream. Conversions to doubles and bounded integers
/// are done here rather than through <random> distributions so that draw
/// sequences do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using Wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<Wide>(engine_()) * bound) >> 64);
  }

  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for a named sub-stream of a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

}  // namespace fgf
