#pragma once

#include <optional>
#include <string>

#include "rek/session.hpp"
#include "rek/svr.hpp"

namespace rek {

// Train/test split in pooled gram order: the last fifth (by test_fraction)
// of each party's block is held out, mirroring the per-party shuffle.
struct Split {
  std::vector<size_t> train;
  std::vector<size_t> test;
};

Split make_split(size_t n_a, size_t n_b, double test_fraction);

struct FitConfig {
  double test_fraction = 0.2;
  bool use_cv = false;               // grid search on the train block
  CvGrid grid = CvGrid::paper();
  SvrHyperparams hp_pitch;           // used when use_cv is false
  SvrHyperparams hp_yaw;
  double tol = 1e-3;
  uint64_t max_iter = 1000000;
  unsigned threads = 1;
};

struct FitResult {
  GazeModelPair models;
  SvrHyperparams hp_pitch, hp_yaw;  // as trained (CV winners when use_cv)
  Split split;
  std::vector<std::array<double, 2>> predictions;  // test set, (pitch, yaw)
  std::vector<std::array<double, 2>> truth;
  double mae_degrees = 0.0;
  double cv_seconds = 0.0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

// Full server-side modelling pass over an assembled gram matrix: optional
// cross-validation, final per-angle training, test-set prediction, angular
// error. Everything operates on gram sub-blocks only.
FitResult fit_and_evaluate(const GramMatrix& gram, const LabelVector& labels,
                           const FitConfig& cfg);

// Prediction-only pass for an existing model pair against gram columns.
std::vector<std::array<double, 2>> predict_gaze(const GazeModelPair& models, const Mat& gram,
                                                const std::vector<size_t>& test_idx,
                                                const std::vector<size_t>& train_idx);

}  // namespace rek
