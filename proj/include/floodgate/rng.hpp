#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace floodgate {

/// Seeded pseudo-random stream with labeled substream derivation.
///
/// Stream derivation is deterministic and documented so that experiments are
/// reproducible from a single master seed:
///
///   state0 = mix(master ^ fnv1a64(label))
///   stateN = mix(stateN-1 ^ subscript[N-1])        for each integer subscript
///
/// where mix() is the splitmix64 finalizer. The derived 64-bit value seeds a
/// xoshiro256++ generator (state expanded with splitmix64). Distinct
/// (label, subscripts...) tuples yield statistically independent streams, so
/// per-input resample blocks, per-trial datasets, and per-batch permutations
/// can all be drawn independently from one master seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Derives the substream seed for (master, label, subscripts...).
  static std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                   std::span<const std::uint64_t> subscripts = {});
  static std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                   std::initializer_list<std::uint64_t> subscripts) {
    return derive_seed(master, label, {subscripts.begin(), subscripts.size()});
  }

  static Rng substream(std::uint64_t master, std::string_view label,
                       std::span<const std::uint64_t> subscripts = {}) {
    return Rng(derive_seed(master, label, subscripts));
  }
  static Rng substream(std::uint64_t master, std::string_view label,
                       std::initializer_list<std::uint64_t> subscripts) {
    return Rng(derive_seed(master, label, {subscripts.begin(), subscripts.size()}));
  }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Integer in [0, n), n >= 1, via rejection (unbiased).
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via inverse-CDF transform of uniform().
  double normal();
  /// Gamma(shape, scale), shape > 0, via Marsaglia-Tsang squeeze.
  double gamma(double shape, double scale);

  /// Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::uint32_t> permutation(std::uint32_t n);

 private:
  std::uint64_t state_[4];
};

}  // namespace floodgate
