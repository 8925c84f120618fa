#pragma once

#include <functional>
#include <optional>
#include <string>

#include "rek/svr.hpp"

namespace rek {

// Compact persisted form of one trained SVR: support coefficients plus,
// when available, the quantized support-sample features that make the model
// usable standalone. Models persisted by the function-party after a private
// session carry no features (the server never sees any) and can only predict
// against gram columns.
struct PersistedSvr {
  TargetKind target = TargetKind::pitch;
  KernelConfig kernel;
  double C = 1.0;
  double epsilon = 0.1;
  double bias = 0.0;
  uint64_t train_n = 0;
  std::vector<uint64_t> support_indices;
  std::vector<double> support_beta;
  bool has_features = false;
  uint64_t n_f = 0;
  std::vector<double> support_features;  // support-major, n_sv * n_f

  size_t n_sv() const { return support_indices.size(); }
};

struct ModelFile {
  uint32_t frac_bits = FixedPointCodec::kDefaultFracBits;
  PersistedSvr pitch;
  PersistedSvr yaw;
};

// Maps a training-sample index to its quantized feature vector (n_f values),
// or nullptr when features are unavailable.
using FeatureLookup = std::function<const double*(size_t train_index)>;

ModelFile persist_models(const GazeModelPair& models, const SvrHyperparams& hp_pitch,
                         const SvrHyperparams& hp_yaw, uint32_t frac_bits, size_t n_f,
                         const FeatureLookup& features);

// Header "REKM", version u16, frac_bits u32, then two model blocks;
// little-endian binary64/u64 throughout.
void write_rekm(const std::string& path, const ModelFile& m);
ModelFile read_rekm(const std::string& path);

// Standalone prediction against raw features; requires embedded support
// features. Features are quantized at the model's frac_bits so predictions
// match the in-session gram-based path bit for bit.
std::vector<std::array<double, 2>> predict_standalone(const ModelFile& m,
                                                      const RealDataset& test);

// True when the solver-facing content (kernel, coefficients, bias, support
// set) of two files agrees exactly, ignoring feature blocks.
bool models_equivalent(const ModelFile& a, const ModelFile& b);

}  // namespace rek
