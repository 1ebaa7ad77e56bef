#pragma once

#include <cstdint>
#include <vector>

namespace sparsedet {

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Counter-based generator: each output is a mix of (key, counter), so a
// generator keyed by (seed, stream, replicate) yields the same sequence on
// every platform and under any thread schedule. The mixing function is the
// 64-bit finalizer from SplitMix64 (Stafford variant 13) applied to a
// Weyl-sequence counter.
class Rng {
 public:
  explicit Rng(RngSeed s, std::uint64_t replicate = 0);

  std::uint64_t next_u64();
  // Uniform in [0, 1), 53-bit resolution.
  double next_double();
  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);
  // +1 or -1 with equal probability.
  int next_rademacher();
  bool next_bernoulli(double rate);
  // Standard normal via the Marsaglia polar method.
  double next_normal();

  // Derive an independent generator; used for per-replicate streams.
  Rng split(std::uint64_t replicate) const;

  // First m indices of a seeded Fisher-Yates pass over [p], sorted.
  std::vector<std::size_t> sample_subset(std::size_t p, std::size_t m);
  // Uniform random permutation of [p]; out[i] is the image of i.
  std::vector<std::size_t> sample_permutation(std::size_t p);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace sparsedet
