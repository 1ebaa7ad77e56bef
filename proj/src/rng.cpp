#include "sparsedet/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sparsedet {

namespace {

constexpr std::uint64_t kWeyl = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

Rng::Rng(RngSeed s, std::uint64_t replicate) {
  // Fold (seed, stream, replicate) into one key with distinct mixing rounds.
  std::uint64_t k = mix(s.seed + kWeyl);
  k = mix(k ^ mix(s.stream + 2 * kWeyl));
  k = mix(k ^ mix(replicate + 3 * kWeyl));
  key_ = k;
}

std::uint64_t Rng::next_u64() { return mix(key_ + (++counter_) * kWeyl); }

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = n * ((~0ULL) / n);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

int Rng::next_rademacher() { return (next_u64() & 1) ? 1 : -1; }

bool Rng::next_bernoulli(double rate) { return next_double() < rate; }

double Rng::next_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_double() - 1.0;
    v = 2.0 * next_double() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  has_cached_normal_ = true;
  return u * f;
}

Rng Rng::split(std::uint64_t replicate) const {
  return Rng(RngSeed{key_, 0x5851f42d4c957f2dULL}, replicate);
}

std::vector<std::size_t> Rng::sample_subset(std::size_t p, std::size_t m) {
  if (m > p) throw std::invalid_argument("sample_subset: m > p");
  std::vector<std::size_t> pool(p);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = i + static_cast<std::size_t>(next_below(p - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::size_t> Rng::sample_permutation(std::size_t p) {
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = p; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(next_below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace sparsedet
