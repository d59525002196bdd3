#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>

namespace rba {

// SplitMix64 output function. Used for seed derivation only.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash-combines a base seed with stream labels. Order sensitive, so
// derive_seed(s, {1, 2}) and derive_seed(s, {2, 1}) name different streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(base ^ 0xa076'1d64'78bd'642fULL);
  for (std::uint64_t p : parts) h = mix64(h ^ p);
  return h;
}

// Deterministic random stream whose draws are identical on every platform.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The helpers below pin down the mapping from raw 64-bit words to
// bounded values (std::uniform_int_distribution and friends are
// implementation-defined, so they are deliberately not used):
//   below(b) : rejection sampling against the largest multiple of b, then
//              modulo. Rejected words are discarded.
//   unit()   : top 53 bits of one word, scaled to [0, 1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform on [-1, 1).
  double symmetric() { return 2.0 * unit() - 1.0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rba
