#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>

#include "rek/errors.hpp"

namespace rek {

// splitmix64 step; used for seed derivation and per-sample streams so that
// parallel generation matches sequential generation bit for bit.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stateless derivation of a sub-seed from (seed, tag).
inline uint64_t derive_seed(uint64_t seed, uint64_t tag) {
  uint64_t s = seed ^ (0x6a09e667f3bcc909ull + tag * 0x9e3779b97f4a7c15ull);
  splitmix64(s);
  return splitmix64(s);
}

// Source of uniform 64-bit words. One stream per protocol session per party;
// streams are single-owner and not thread safe.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual uint64_t next_u64() = 0;
};

// Deterministic seeded stream for reproducible runs and tests.
class Mt19937Source final : public RandomSource {
 public:
  explicit Mt19937Source(uint64_t seed) : gen_(seed) {}
  uint64_t next_u64() override { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// OS-entropy-seeded stream for deployment-style runs.
class SystemSource final : public RandomSource {
 public:
  SystemSource() {
    try {
      std::random_device rd;
      uint64_t seed = (static_cast<uint64_t>(rd()) << 32) ^ rd();
      gen_.seed(seed);
    } catch (const std::exception& e) {
      throw EntropyUnavailable(std::string("OS entropy unavailable: ") + e.what());
    }
  }
  uint64_t next_u64() override { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Degenerate all-zero stream. Audit-only hook for verifying that the
// uniformity checks actually catch a broken mask source.
class ZeroSource final : public RandomSource {
 public:
  uint64_t next_u64() override { return 0; }
};

// Uniform double in [0, 1) from one 64-bit word (53 mantissa bits).
inline double uniform_double(RandomSource& src) {
  return std::ldexp(static_cast<double>(src.next_u64() >> 11), -53);
}

inline double uniform_in(RandomSource& src, double lo, double hi) {
  return lo + (hi - lo) * uniform_double(src);
}

// Standard normal via Box-Muller; avoids std::normal_distribution so the
// byte stream is identical across standard libraries.
inline double gaussian(RandomSource& src) {
  double u1 = uniform_double(src);
  double u2 = uniform_double(src);
  while (u1 <= 0.0) u1 = uniform_double(src);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace rek
