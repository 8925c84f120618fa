#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rek/dense.hpp"
#include "rek/encoding.hpp"
#include "rek/ring.hpp"

namespace rek {

enum class Role : uint8_t { left = 0, right = 1 };  // left = Alice, right = Bob

inline const char* role_name(Role r) { return r == Role::left ? "alice" : "bob"; }

// Column-major feature matrix over the ring; one column per sample.
struct FeatureMatrix {
  size_t n_f = 0;
  size_t n = 0;
  RingVector data;  // n_f * n, column major

  FeatureMatrix() = default;
  FeatureMatrix(size_t n_f_, size_t n_) : n_f(n_f_), n(n_), data(n_f_ * n_) {}

  RingElement& at(size_t d, size_t col) { return data[col * n_f + d]; }
  RingElement at(size_t d, size_t col) const { return data[col * n_f + d]; }
  const RingElement* col(size_t j) const { return data.data() + j * n_f; }
  RingElement* col(size_t j) { return data.data() + j * n_f; }

  RingVector column(size_t j) const {
    return RingVector(data.begin() + static_cast<long>(j * n_f),
                      data.begin() + static_cast<long>((j + 1) * n_f));
  }
};

// Per-sample regression targets: pitch and yaw in radians. Rows permuted by
// the same shuffle as the companion FeatureMatrix columns.
struct LabelVector {
  std::vector<std::array<double, 2>> targets;  // {pitch, yaw}

  size_t n() const { return targets.size(); }
};

// Real-valued dataset as held by an input-party before quantization.
struct RealDataset {
  size_t n_f = 0;
  size_t n = 0;
  std::vector<double> features;  // column major, n_f * n
  LabelVector labels;

  double& at(size_t d, size_t col) { return features[col * n_f + d]; }
  double at(size_t d, size_t col) const { return features[col * n_f + d]; }
};

// One input-party's outgoing payload.
struct ShareBundle {
  Role role = Role::left;
  size_t n_f = 0;
  size_t n = 0;
  FeatureMatrix masked_matrix;  // C1 (left) or C2 (right)
  RingVector masked_scalars;    // C3 (left) or C4 (right)
  Mat local_gram;               // party's own X^T X, real arithmetic on quantized features
  LabelVector labels;
};

// Assembled (n_a+n_b) x (n_a+n_b) dot-product matrix with block structure
// [[X^T X, X^T Y], [Y^T X, Y^T Y]].
struct GramMatrix {
  size_t n_a = 0;
  size_t n_b = 0;
  Mat k;

  size_t n() const { return n_a + n_b; }
};

// Fisher-Yates column shuffle; the identical permutation is applied to label
// rows. The permutation stays local to the party.
struct ShuffleResult {
  std::vector<size_t> permutation;  // out[:, i] = in[:, permutation[i]]
};

ShuffleResult shuffle_dataset(RealDataset& data, uint64_t seed);

// Alice's session setup: fresh dot-product randomness destined for Bob only.
DotRandomness alice_setup(size_t n_f, RandomSource& src);
DotRandomness alice_setup(size_t n_f, uint64_t seed);

// Quantize a real dataset onto the codec grid and embed it in the ring.
// Throws OverflowDetected when audit mode is on and a feature falls outside
// the codec range.
FeatureMatrix quantize_features(const RealDataset& data, const FixedPointCodec& codec,
                                bool audit_range = true);

// Per-column application of the dot-product encoding plus the local gram
// block, computed in real arithmetic from decoded (quantized) features.
ShareBundle build_share_bundle(Role role, const RealDataset& shuffled,
                               const DotRandomness& r, const FixedPointCodec& codec,
                               bool audit_range = true);

// Cross block via recover_dot per (i, j), decoded at doubled fractional
// bits; diagonal blocks copied from the parties' local grams; result is
// symmetric by construction. `threads` > 1 parallelizes over rows of the
// cross block with output independent of scheduling.
GramMatrix assemble_gram(const ShareBundle& alice, const ShareBundle& bob, uint32_t frac_bits,
                         unsigned threads = 1);

// (n_f*n_a + n_f*n_b + n_a + n_b + 2*n_f) * d
uint64_t communication_bytes(uint64_t n_f, uint64_t n_a, uint64_t n_b, uint64_t d);

// Plaintext reference: gram of the quantized pooled data, columns of `a`
// first. Used by equivalence checks and tests.
GramMatrix plaintext_gram(const RealDataset& a, const RealDataset& b,
                          const FixedPointCodec& codec);

// Pooled labels in gram order (alice block then bob block).
LabelVector pool_labels(const LabelVector& a, const LabelVector& b);

}  // namespace rek
