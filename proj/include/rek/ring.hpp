#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rek/errors.hpp"
#include "rek/rng.hpp"

namespace rek {

// Element of Z_{2^64}. All arithmetic wraps; nothing can fail or saturate.
struct RingElement {
  uint64_t v = 0;

  constexpr RingElement() = default;
  constexpr explicit RingElement(uint64_t value) : v(value) {}

  friend constexpr RingElement operator+(RingElement a, RingElement b) {
    return RingElement{a.v + b.v};
  }
  friend constexpr RingElement operator-(RingElement a, RingElement b) {
    return RingElement{a.v - b.v};
  }
  friend constexpr RingElement operator*(RingElement a, RingElement b) {
    return RingElement{a.v * b.v};
  }
  constexpr RingElement& operator+=(RingElement o) {
    v += o.v;
    return *this;
  }
  constexpr RingElement& operator-=(RingElement o) {
    v -= o.v;
    return *this;
  }
  friend constexpr bool operator==(RingElement a, RingElement b) { return a.v == b.v; }
  friend constexpr bool operator!=(RingElement a, RingElement b) { return a.v != b.v; }
};

using RingVector = std::vector<RingElement>;

// Fixed-point view of the ring: reals scaled by 2^frac_bits, negatives in
// two's-complement embedding. A raw product of two encoded values carries
// 2*frac_bits fractional bits and must be decoded with decode_product().
class FixedPointCodec {
 public:
  static constexpr uint32_t kDefaultFracBits = 20;

  explicit FixedPointCodec(uint32_t frac_bits = kDefaultFracBits) : frac_bits_(frac_bits) {
    if (frac_bits_ < 1 || frac_bits_ > 31) {
      throw InvalidConfig("frac_bits must be in [1, 31], got " + std::to_string(frac_bits_));
    }
  }

  uint32_t frac_bits() const { return frac_bits_; }

  // Largest representable magnitude: 2^(63 - 2*frac_bits). Inputs bounded by
  // this keep 36-element dot products of [-4, 4] features away from wraparound.
  double max_abs() const { return std::ldexp(1.0, 63 - 2 * static_cast<int>(frac_bits_)); }

  RingElement encode(double x) const {
    if (!(std::fabs(x) < max_abs())) {
      throw OutOfRange("encode: |" + std::to_string(x) + "| >= 2^" +
                       std::to_string(63 - 2 * static_cast<int>(frac_bits_)));
    }
    const double scaled = std::ldexp(x, static_cast<int>(frac_bits_));
    const int64_t q = std::llround(scaled);
    return RingElement{static_cast<uint64_t>(q)};
  }

  // Signed reinterpretation divided by 2^frac_bits. Total on in-range inputs.
  double decode(RingElement e) const {
    return std::ldexp(static_cast<double>(static_cast<int64_t>(e.v)),
                      -static_cast<int>(frac_bits_));
  }

  // Decode a raw ring product (doubled fractional bits).
  double decode_product(RingElement e) const {
    return std::ldexp(static_cast<double>(static_cast<int64_t>(e.v)),
                      -2 * static_cast<int>(frac_bits_));
  }

  // Audit-mode decode: rejects values outside the encode range, which can
  // only arise from upstream wraparound.
  double decode_checked(RingElement e) const {
    const double x = decode(e);
    if (!(std::fabs(x) < max_abs())) {
      throw OverflowDetected("decode: value " + std::to_string(x) + " outside codec range");
    }
    return x;
  }

  // Round a real onto the codec grid (encode then decode).
  double quantize(double x) const { return decode(encode(x)); }

 private:
  uint32_t frac_bits_;
};

inline RingElement encode(double x, uint32_t frac_bits) {
  return FixedPointCodec(frac_bits).encode(x);
}

// Accepts up to doubled fractional bits so raw ring products can be decoded
// directly.
inline double decode(RingElement e, uint32_t frac_bits) {
  if (frac_bits < 1 || frac_bits > 62) {
    throw InvalidConfig("decode: frac_bits must be in [1, 62]");
  }
  return std::ldexp(static_cast<double>(static_cast<int64_t>(e.v)),
                    -static_cast<int>(frac_bits));
}

// Every 64-bit residue equally likely.
inline RingElement sample_uniform(RandomSource& src) { return RingElement{src.next_u64()}; }

inline RingVector sample_uniform_vector(RandomSource& src, size_t n) {
  RingVector out(n);
  for (auto& e : out) e = sample_uniform(src);
  return out;
}

}  // namespace rek
