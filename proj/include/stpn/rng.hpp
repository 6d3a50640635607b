#pragma once

#include <cstdint>
#include <random>

namespace stpn {

// One seeded stream. Every random decision in a run (duration samples,
// conflict resolution, parameter sampling) goes through one of these, so a
// run is a pure function of its seed.
class rng {
public:
  explicit rng(std::uint64_t seed = 0) : engine_{seed}, seed_{seed} {}

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  // splitmix64 finalizer over (seed, stream): child seeds for distinct
  // stream indices are decorrelated even for adjacent indices.
  [[nodiscard]] static std::uint64_t derive(std::uint64_t seed,
                                            std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  [[nodiscard]] rng split(std::uint64_t stream) const {
    return rng{derive(seed_, stream)};
  }

  // [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double low, double high) {
    return low + (high - low) * uniform01();
  }

  double normal(double mean, double stddev) {
    if (stddev <= 0.0)
      return mean;
    return std::normal_distribution<double>{mean, stddev}(engine_);
  }

  // Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>{0, n - 1}(engine_);
  }

  // Uniform integer in [low, high].
  std::int64_t integer(std::int64_t low, std::int64_t high) {
    return std::uniform_int_distribution<std::int64_t>{low, high}(engine_);
  }

  bool bernoulli(double p) { return uniform01() < p; }

private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

} // namespace stpn
