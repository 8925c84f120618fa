#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "rek/protocol.hpp"
#include "rek/rng.hpp"

namespace rek {

constexpr size_t kNumFeatures = 36;
constexpr double kMaxAngleRad = 30.0 * M_PI / 180.0;

// Geometry of the parametric eye model. Units are arbitrary model units;
// every landmark is normalized by the inter-corner distance at the end.
struct EyeModelParams {
  double eyeball_radius = 12.0;
  double iris_radius = 4.8;
  double eyelid_openness_base = 0.8;  // fraction of eyeball radius
  double corner_half_width = 11.0;
  double landmark_noise_std = 0.0;  // pre-normalization, zero-mean Gaussian
  uint64_t seed = 0;

  void validate() const {
    if (!(eyeball_radius > 0.0) || !(iris_radius > 0.0) || !(corner_half_width > 0.0)) {
      throw InvalidConfig("eye model radii and corner width must be positive");
    }
    if (!(iris_radius < eyeball_radius)) {
      throw InvalidConfig("iris radius must be smaller than eyeball radius");
    }
    if (landmark_noise_std < 0.0) throw InvalidConfig("noise std must be >= 0");
  }
};

// 36 features: 8 iris-edge points (x,y), 8 eyelid points (x,y), iris center
// (x,y), iris-center-to-eyeball-center vector (x,y); all divided by the
// distance between the two eye corners.
struct LandmarkSample {
  std::array<double, kNumFeatures> features{};
  double pitch = 0.0;  // radians
  double yaw = 0.0;    // radians
};

// Unit gaze vector; camera-facing -z convention:
// g = (-cos(pitch)*sin(yaw), -sin(pitch), -cos(pitch)*cos(yaw)).
std::array<double, 3> angles_to_gaze(double pitch, double yaw);

// Deterministic given (pitch, yaw, params, sample_index); noise, when
// enabled, is drawn from a stream derived from (params.seed, sample_index).
LandmarkSample synthesize_sample(double pitch, double yaw, const EyeModelParams& params,
                                 uint64_t sample_index = 0);

// Pitch and yaw sampled independently and uniformly in [-30deg, +30deg].
RealDataset generate_dataset(size_t n, const EyeModelParams& params);

// Binary dataset file: magic "REKD", version u16, n u64, n_f u64, then per
// sample 36 binary64 features + 2 binary64 angles; little-endian throughout.
void write_rekd(const std::string& path, const RealDataset& data);
RealDataset read_rekd(const std::string& path);

// One row per sample, 38 columns (36 features, pitch, yaw).
void write_csv(const std::string& path, const RealDataset& data);

uint64_t file_checksum(const std::string& path);

}  // namespace rek
