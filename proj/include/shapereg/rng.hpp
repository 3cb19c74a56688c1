#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace shapereg {

inline constexpr std::uint64_t default_seed = 424242;

// splitmix64 finalizer; used to derive statistically independent child
// streams without correlated low bits.
std::uint64_t mix64(std::uint64_t x);

// Seed for the idx-th child stream of a parent seed.
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t idx);

// Inverse standard normal CDF (Wichura's AS241, double precision).
// pre: 0 < p < 1
double normal_icdf(double p);

// Deterministic generator. mt19937_64 has a fully specified bit stream, and
// every variate here is built from it with explicitly coded transforms, so
// identical seeds give identical doubles on any conforming platform.
// (std::normal_distribution is implementation-defined; we avoid it.)
class rng {
 public:
  explicit rng(std::uint64_t seed = default_seed) : seed_(seed), eng_(seed) {}

  // uniform on [0, 1): 53 random bits
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // uniform on (0, 1), safe as an icdf argument
  double uniform01_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_icdf(uniform01_open()); }

  // uniform integer in [0, n); rejection sampling, no modulo bias
  std::uint64_t uniform_below(std::uint64_t n);

  std::vector<double> normals(std::size_t n);

  std::uint64_t seed() const { return seed_; }

  rng child(std::uint64_t idx) const { return rng(child_seed(seed_, idx)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace shapereg
