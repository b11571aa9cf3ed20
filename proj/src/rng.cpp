#include "floodgate/rng.hpp"

#include <cmath>

#include "floodgate/errors.hpp"
#include "floodgate/stats.hpp"

namespace floodgate {

namespace {

// splitmix64 finalizer (Vigna); full-period bijective mix on 64 bits.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  // Expand the 64-bit seed into xoshiro256++ state via splitmix64 steps.
  std::uint64_t s = seed;
  for (auto& word : state_) {
    s = mix64(s);
    word = s;
  }
  state_[0] |= 1;  // xoshiro state must not be all zero
}

std::uint64_t Rng::derive_seed(std::uint64_t master, std::string_view label,
                               std::span<const std::uint64_t> subscripts) {
  std::uint64_t s = mix64(master ^ fnv1a64(label));
  for (std::uint64_t sub : subscripts) s = mix64(s ^ sub);
  return s;
}

std::uint64_t Rng::next_u64() {
  // xoshiro256++ (Blackman & Vigna, public domain reference implementation).
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw InvalidArgumentError("uniform_index: n must be >= 1");
  const std::uint64_t limit = n * (~0ULL / n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Inverse-CDF transform; uniform() never returns exactly 0 or 1 after the
  // shift below, keeping the quantile finite.
  double u = uniform();
  if (u <= 0.0) u = 0x1.0p-53;
  return normal_quantile(u);
}

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw InvalidArgumentError("gamma: shape and scale must be positive");
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^(1/a).
    const double u = std::max(uniform(), 0x1.0p-53);
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = std::max(uniform(), 0x1.0p-53);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
      return scale * d * v;
  }
}

std::vector<std::uint32_t> Rng::permutation(std::uint32_t n) {
  std::vector<std::uint32_t> p(n);
  for (std::uint32_t i = 0; i < n; ++i) p[i] = i;
  for (std::uint32_t i = n; i > 1; --i) {
    const auto k = static_cast<std::uint32_t>(uniform_index(i));
    std::swap(p[i - 1], p[k]);
  }
  return p;
}

}  // namespace floodgate
