#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace sgvae {

// Deterministic random stream: xoshiro256++ with splitmix64 seeding.
//
// Every sampling site in the project draws from a stream forked off the
// global seed by fixed labels and counters (epoch, graph index, draw index),
// so results never depend on evaluation order or on the number of worker
// threads. Floating-point conversions are done by hand for the same reason.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();

  // Standard Gaussian via Box-Muller. Two uniforms per draw, no cached half.
  double normal();

  // Index into a probability vector (walks the cumulative sum).
  int categorical(std::span<const double> probs);

  bool bernoulli(double p_true);

  // Independent substream keyed by (this stream's seed, a, b, c).
  Rng fork(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;
  Rng fork(std::string_view label, std::uint64_t a = 0, std::uint64_t b = 0,
           std::uint64_t c = 0) const;

  std::uint64_t seed() const { return seed_; }

  static std::uint64_t hash_label(std::string_view s);

 private:
  std::uint64_t seed_ = 0;  // derivation key, untouched by draws
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace sgvae
