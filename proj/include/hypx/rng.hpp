#pragma once

#include <cstdint>
#include <string_view>

#include "hypx/tensor.hpp"

namespace hypx {

// Splittable seeded generator (xoshiro256++ seeded through splitmix64).
// Forking with distinct labels yields statistically independent streams,
// independent of how much the parent has been consumed, so per-run streams
// are reproducible regardless of thread scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream fork(std::uint64_t label) const;
  RngStream fork(std::string_view label) const;

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  int uniform_int(int n);                  // {0, ..., n-1}
  double normal();                         // N(0, 1), Marsaglia polar
  double truncated_normal(double stddev);  // resamples outside +-2 sigma

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t s_[4] = {0, 0, 0, 0};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// n independent N(0,1) draws as an n x 1 tensor. n >= 1.
Tensor sample_gaussian(RngStream& rng, int n);

// Uniform draw from the unit hypersphere in R^n (normalized Gaussian). n >= 1.
Tensor sample_hypersphere(RngStream& rng, int n);

}  // namespace hypx
