#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace embsizer {

// Seeded random stream. Distribution transforms are written out here rather
// than taken from <random> so that draws are identical across standard
// library implementations (the engine itself is fully specified).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return counter_; }

  std::uint64_t next_u64() {
    ++counter_;
    return engine_();
  }
  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n).
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Index drawn from unnormalized non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  // Independent child stream; used to give each pipeline role its own
  // sequence so that e.g. sampler draws never shift initialization draws.
  RngStream fork(std::uint64_t salt) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer; mixes seeds for derived streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

// Pipeline roles that draw randomness. Every stage derives its streams from
// one run seed through these salts.
enum class SeedRole : std::uint64_t { Init = 1, Shuffle = 2, Sampler = 3, Search = 4, Subsample = 5 };
inline std::uint64_t role_seed(std::uint64_t seed, SeedRole role) noexcept {
  return mix_seed(seed, static_cast<std::uint64_t>(role));
}

}  // namespace embsizer
