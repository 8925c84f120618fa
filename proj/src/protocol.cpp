#include "rek/protocol.hpp"

#include <algorithm>
#include <thread>

namespace rek {

ShuffleResult shuffle_dataset(RealDataset& data, uint64_t seed) {
  if (data.labels.n() != data.n) {
    throw DimensionMismatch("shuffle_dataset: " + std::to_string(data.labels.n()) +
                            " label rows for " + std::to_string(data.n) + " samples");
  }
  std::vector<size_t> perm(data.n);
  for (size_t i = 0; i < data.n; ++i) perm[i] = i;

  Mt19937Source src(seed);
  for (size_t i = data.n; i > 1; --i) {
    const size_t j = static_cast<size_t>(src.next_u64() % i);
    std::swap(perm[i - 1], perm[j]);
  }

  std::vector<double> shuffled(data.features.size());
  std::vector<std::array<double, 2>> labels(data.n);
  for (size_t i = 0; i < data.n; ++i) {
    const size_t from = perm[i];
    std::copy_n(data.features.data() + from * data.n_f, data.n_f,
                shuffled.data() + i * data.n_f);
    labels[i] = data.labels.targets[from];
  }
  data.features = std::move(shuffled);
  data.labels.targets = std::move(labels);
  return ShuffleResult{std::move(perm)};
}

DotRandomness alice_setup(size_t n_f, RandomSource& src) {
  if (n_f < 1) throw DimensionMismatch("alice_setup: n_f must be >= 1");
  return DotRandomness::sample(n_f, src);
}

DotRandomness alice_setup(size_t n_f, uint64_t seed) {
  Mt19937Source src(seed);
  return alice_setup(n_f, src);
}

FeatureMatrix quantize_features(const RealDataset& data, const FixedPointCodec& codec,
                                bool audit_range) {
  FeatureMatrix out(data.n_f, data.n);
  for (size_t k = 0; k < data.features.size(); ++k) {
    const double x = data.features[k];
    if (audit_range && !(std::fabs(x) < codec.max_abs())) {
      throw OverflowDetected("feature magnitude " + std::to_string(x) +
                             " outside codec range at frac_bits " +
                             std::to_string(codec.frac_bits()));
    }
    out.data[k] = codec.encode(x);
  }
  return out;
}

namespace {

// Gram of the party's own quantized columns, in real arithmetic. Quantized
// features and their 36-term dot products are exactly representable, so this
// matches the ring-recovered values bit for bit.
Mat local_gram(const FeatureMatrix& fm, const FixedPointCodec& codec) {
  std::vector<double> dec(fm.data.size());
  for (size_t k = 0; k < fm.data.size(); ++k) dec[k] = codec.decode(fm.data[k]);
  Mat g(fm.n, fm.n);
  for (size_t i = 0; i < fm.n; ++i) {
    const double* ci = dec.data() + i * fm.n_f;
    for (size_t j = i; j < fm.n; ++j) {
      const double* cj = dec.data() + j * fm.n_f;
      double acc = 0.0;
      for (size_t d = 0; d < fm.n_f; ++d) acc += ci[d] * cj[d];
      g(i, j) = acc;
      g(j, i) = acc;
    }
  }
  return g;
}

}  // namespace

ShareBundle build_share_bundle(Role role, const RealDataset& shuffled, const DotRandomness& r,
                               const FixedPointCodec& codec, bool audit_range) {
  if (shuffled.n < 1) throw DimensionMismatch("build_share_bundle: empty dataset rejected");
  if (shuffled.n_f != r.n_f()) {
    throw DimensionMismatch("build_share_bundle: n_f " + std::to_string(shuffled.n_f) +
                            " vs randomness " + std::to_string(r.n_f()));
  }
  if (shuffled.labels.n() != shuffled.n) {
    throw DimensionMismatch("build_share_bundle: label rows != sample count");
  }

  const FeatureMatrix fm = quantize_features(shuffled, codec, audit_range);

  ShareBundle b;
  b.role = role;
  b.n_f = shuffled.n_f;
  b.n = shuffled.n;
  b.masked_matrix = FeatureMatrix(shuffled.n_f, shuffled.n);
  b.masked_scalars.resize(shuffled.n);
  for (size_t j = 0; j < shuffled.n; ++j) {
    auto [masked, scalar] = role == Role::left ? encode_dot_left(fm.column(j), r)
                                               : encode_dot_right(fm.column(j), r);
    std::copy(masked.begin(), masked.end(), b.masked_matrix.col(j));
    b.masked_scalars[j] = scalar;
  }
  b.local_gram = local_gram(fm, codec);
  b.labels = shuffled.labels;
  return b;
}

GramMatrix assemble_gram(const ShareBundle& alice, const ShareBundle& bob, uint32_t frac_bits,
                         unsigned threads) {
  if (alice.role == bob.role) {
    throw RoleConflict("assemble_gram: two bundles with role " +
                       std::string(role_name(alice.role)));
  }
  const ShareBundle& left = alice.role == Role::left ? alice : bob;
  const ShareBundle& right = alice.role == Role::left ? bob : alice;
  if (left.n_f != right.n_f) {
    throw DimensionMismatch("assemble_gram: n_f " + std::to_string(left.n_f) + " vs " +
                            std::to_string(right.n_f));
  }
  if (left.n == 0 || right.n == 0) {
    throw DimensionMismatch("assemble_gram: n=0 rejected");
  }

  const FixedPointCodec codec(frac_bits);
  const size_t n_a = left.n, n_b = right.n, n_f = left.n_f;
  GramMatrix g;
  g.n_a = n_a;
  g.n_b = n_b;
  g.k = Mat(n_a + n_b, n_a + n_b);

  for (size_t i = 0; i < n_a; ++i)
    for (size_t j = 0; j < n_a; ++j) g.k(i, j) = left.local_gram(i, j);
  for (size_t i = 0; i < n_b; ++i)
    for (size_t j = 0; j < n_b; ++j) g.k(n_a + i, n_a + j) = right.local_gram(i, j);

  auto cross_rows = [&](size_t i_begin, size_t i_end) {
    for (size_t i = i_begin; i < i_end; ++i) {
      const RingElement* c1 = left.masked_matrix.col(i);
      const RingElement c3 = left.masked_scalars[i];
      for (size_t j = 0; j < n_b; ++j) {
        const RingElement* c2 = right.masked_matrix.col(j);
        RingElement acc{0};
        for (size_t d = 0; d < n_f; ++d) acc += c1[d] * c2[d];
        const double k_ij = codec.decode_product(acc - c3 - right.masked_scalars[j]);
        g.k(i, n_a + j) = k_ij;
        g.k(n_a + j, i) = k_ij;
      }
    }
  };

  if (threads <= 1 || n_a < 2 * threads) {
    cross_rows(0, n_a);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (n_a + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const size_t b0 = std::min(n_a, t * chunk);
      const size_t b1 = std::min(n_a, b0 + chunk);
      if (b0 < b1) pool.emplace_back(cross_rows, b0, b1);
    }
    for (auto& th : pool) th.join();
  }
  return g;
}

uint64_t communication_bytes(uint64_t n_f, uint64_t n_a, uint64_t n_b, uint64_t d) {
  return (n_f * n_a + n_f * n_b + n_a + n_b + 2 * n_f) * d;
}

GramMatrix plaintext_gram(const RealDataset& a, const RealDataset& b,
                          const FixedPointCodec& codec) {
  if (a.n_f != b.n_f) throw DimensionMismatch("plaintext_gram: n_f mismatch");
  if (a.n == 0 || b.n == 0) throw DimensionMismatch("plaintext_gram: n=0 rejected");
  const size_t n_f = a.n_f, n = a.n + b.n;
  std::vector<double> q(n * n_f);
  for (size_t j = 0; j < a.n; ++j)
    for (size_t d = 0; d < n_f; ++d) q[j * n_f + d] = codec.quantize(a.at(d, j));
  for (size_t j = 0; j < b.n; ++j)
    for (size_t d = 0; d < n_f; ++d) q[(a.n + j) * n_f + d] = codec.quantize(b.at(d, j));

  GramMatrix g;
  g.n_a = a.n;
  g.n_b = b.n;
  g.k = Mat(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (size_t d = 0; d < n_f; ++d) acc += q[i * n_f + d] * q[j * n_f + d];
      g.k(i, j) = acc;
      g.k(j, i) = acc;
    }
  }
  return g;
}

LabelVector pool_labels(const LabelVector& a, const LabelVector& b) {
  LabelVector out;
  out.targets.reserve(a.n() + b.n());
  out.targets.insert(out.targets.end(), a.targets.begin(), a.targets.end());
  out.targets.insert(out.targets.end(), b.targets.begin(), b.targets.end());
  return out;
}

}  // namespace rek
