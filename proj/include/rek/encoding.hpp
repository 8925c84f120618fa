#pragma once

#include <cstddef>
#include <utility>

#include "rek/errors.hpp"
#include "rek/ring.hpp"

namespace rek {

// Randomness for one multiplication encoding. Each component is sampled
// independently and uniformly; never reuse across distinct input pairs
// within a session.
struct MulRandomness {
  RingElement r1, r2, r3;

  static MulRandomness sample(RandomSource& src) {
    return MulRandomness{sample_uniform(src), sample_uniform(src), sample_uniform(src)};
  }
};

// Affine encoding of x1*x2. Invariant: c1*c2 - c3 - c4 == x1*x2 in the ring.
struct MulEncoding {
  RingElement c1, c2, c3, c4;
};

// Randomness for the dot-product encoding: one mask vector per side plus a
// single scalar shared by the column sums.
struct DotRandomness {
  RingVector r1;  // masks the left party's columns
  RingVector r2;  // masks the right party's columns
  RingElement r3;

  size_t n_f() const { return r1.size(); }

  static DotRandomness sample(size_t n_f, RandomSource& src) {
    DotRandomness r;
    r.r1 = sample_uniform_vector(src, n_f);
    r.r2 = sample_uniform_vector(src, n_f);
    r.r3 = sample_uniform(src);
    return r;
  }
};

// (x1+r1, x2+r2, r2*x1+r3, r1*x2+r1*r2-r3)
inline MulEncoding encode_mul(RingElement x1, RingElement x2, const MulRandomness& r) {
  return MulEncoding{
      x1 + r.r1,
      x2 + r.r2,
      r.r2 * x1 + r.r3,
      r.r1 * x2 + r.r1 * r.r2 - r.r3,
  };
}

// c1*c2 - c3 - c4. Garbage in, garbage out on malformed encodings; the
// construction offers no way to detect them.
inline RingElement recover_mul(const MulEncoding& c) { return c.c1 * c.c2 - c.c3 - c.c4; }

// Simulator: output distribution over uniform (a1,a2,a3) matches encode_mul
// over uniform randomness for any inputs multiplying to y.
inline MulEncoding simulate_mul(RingElement y, RingElement a1, RingElement a2, RingElement a3) {
  return MulEncoding{a1, a2, a3, a1 * a2 - y - a3};
}

// Left-party share of one column: c1 = x + r1 elementwise,
// c3 = sum_d (r2 . x)_d + r3.
inline std::pair<RingVector, RingElement> encode_dot_left(const RingVector& x,
                                                          const DotRandomness& r) {
  if (x.size() != r.n_f() || r.r2.size() != r.n_f()) {
    throw DimensionMismatch("encode_dot_left: vector length " + std::to_string(x.size()) +
                            " vs randomness length " + std::to_string(r.n_f()));
  }
  RingVector c1(x.size());
  RingElement c3 = r.r3;
  for (size_t d = 0; d < x.size(); ++d) {
    c1[d] = x[d] + r.r1[d];
    c3 += r.r2[d] * x[d];
  }
  return {std::move(c1), c3};
}

// Right-party share of one column: c2 = y + r2 elementwise,
// c4 = sum_d (r1 . y + r1 . r2)_d - r3.
inline std::pair<RingVector, RingElement> encode_dot_right(const RingVector& y,
                                                           const DotRandomness& r) {
  if (y.size() != r.n_f() || r.r2.size() != r.n_f()) {
    throw DimensionMismatch("encode_dot_right: vector length " + std::to_string(y.size()) +
                            " vs randomness length " + std::to_string(r.n_f()));
  }
  RingVector c2(y.size());
  RingElement c4 = RingElement{0} - r.r3;
  for (size_t d = 0; d < y.size(); ++d) {
    c2[d] = y[d] + r.r2[d];
    c4 += r.r1[d] * y[d] + r.r1[d] * r.r2[d];
  }
  return {std::move(c2), c4};
}

// sum_d (c1 . c2)_d - c3 - c4 = the ring dot product of the original columns.
inline RingElement recover_dot(const RingVector& c1, const RingVector& c2, RingElement c3,
                               RingElement c4) {
  if (c1.size() != c2.size()) {
    throw DimensionMismatch("recover_dot: " + std::to_string(c1.size()) + " vs " +
                            std::to_string(c2.size()));
  }
  RingElement acc{0};
  for (size_t d = 0; d < c1.size(); ++d) acc += c1[d] * c2[d];
  return acc - c3 - c4;
}

}  // namespace rek
