#pragma once
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace epimeter {

// Counter-mode ARX mixer: 12 SPECK-style add-rotate-xor rounds on a 64-bit
// pair, with the matching lightweight key schedule, in the spirit of
// counter-mode stream constructions. It is a statistical stand-in, NOT a
// certified CSPRNG. Used for the prg control source and for deriving
// independent per-record / per-run seeds (which makes generation order-free
// and hence safely parallel).
constexpr std::uint64_t rotl64(std::uint64_t x, int r) {
  return (x << r) | (x >> (64 - r));
}

constexpr std::uint64_t rotr64(std::uint64_t x, int r) {
  return (x >> r) | (x << (64 - r));
}

constexpr std::uint64_t arx_mix(std::uint64_t key, std::uint64_t counter) {
  std::uint64_t x = counter, y = 0x9e3779b97f4a7c15ull;
  std::uint64_t k = key, l = 0x2545f4914f6cdd1dull ^ key;
  for (int i = 0; i < 12; ++i) {
    x = (rotr64(x, 8) + y) ^ k;
    y = rotl64(y, 3) ^ x;
    l = (rotr64(l, 8) + k) ^ static_cast<std::uint64_t>(i);
    k = rotl64(k, 3) ^ l;
  }
  return x ^ y;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return arx_mix(base, index);
}

// SplitMix64: the utility stream generator (sequential draws within a record
// or run; streams are seeded via arx_mix so they never overlap).
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1) with 53 bits
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // unbiased uniform integer in [0, n) by rejection
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }
};

// Dirichlet(1,...,1) row: normalized exponentials (uniform on the simplex).
inline std::vector<double> dirichlet1(SplitMix64& rng, std::size_t k) {
  std::vector<double> row(k);
  double sum = 0.0;
  for (auto& v : row) {
    double u = rng.next_double();
    if (u <= 0.0) u = 0x1.0p-53;
    v = -std::log(u);
    sum += v;
  }
  for (auto& v : row) v /= sum;
  return row;
}

// inverse-CDF draw from a probability vector; u in [0,1)
inline std::size_t sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.empty() ? 0 : probs.size() - 1;
}

}  // namespace epimeter
