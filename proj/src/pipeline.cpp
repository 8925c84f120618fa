#include "rek/pipeline.hpp"

#include <chrono>
#include <thread>

namespace rek {

namespace {
using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace

Split make_split(size_t n_a, size_t n_b, double test_fraction) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw InvalidConfig("test_fraction must be in [0, 1)");
  }
  Split s;
  const size_t test_a = static_cast<size_t>(static_cast<double>(n_a) * test_fraction);
  const size_t test_b = static_cast<size_t>(static_cast<double>(n_b) * test_fraction);
  for (size_t i = 0; i < n_a - test_a; ++i) s.train.push_back(i);
  for (size_t i = 0; i < n_b - test_b; ++i) s.train.push_back(n_a + i);
  for (size_t i = n_a - test_a; i < n_a; ++i) s.test.push_back(i);
  for (size_t i = n_b - test_b; i < n_b; ++i) s.test.push_back(n_a + i);
  return s;
}

std::vector<std::array<double, 2>> predict_gaze(const GazeModelPair& models, const Mat& gram,
                                                const std::vector<size_t>& test_idx,
                                                const std::vector<size_t>& train_idx) {
  const Mat k_pitch = kernel_block_from_gram(gram, test_idx, train_idx, models.pitch_model.kernel);
  const std::vector<double> pitch = predict_block(models.pitch_model, k_pitch);
  std::vector<double> yaw;
  if (models.yaw_model.kernel.kind == models.pitch_model.kernel.kind &&
      models.yaw_model.kernel.gamma == models.pitch_model.kernel.gamma &&
      models.yaw_model.kernel.degree == models.pitch_model.kernel.degree &&
      models.yaw_model.kernel.offset == models.pitch_model.kernel.offset) {
    yaw = predict_block(models.yaw_model, k_pitch);
  } else {
    const Mat k_yaw = kernel_block_from_gram(gram, test_idx, train_idx, models.yaw_model.kernel);
    yaw = predict_block(models.yaw_model, k_yaw);
  }
  std::vector<std::array<double, 2>> out(test_idx.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = {pitch[i], yaw[i]};
  return out;
}

FitResult fit_and_evaluate(const GramMatrix& gram, const LabelVector& labels,
                           const FitConfig& cfg) {
  if (labels.n() != gram.n()) {
    throw DimensionMismatch("fit_and_evaluate: labels/gram size mismatch");
  }
  FitResult res;
  res.split = make_split(gram.n_a, gram.n_b, cfg.test_fraction);
  const auto& train_idx = res.split.train;
  const auto& test_idx = res.split.test;
  if (train_idx.size() < 2) throw TooFewSamples("fit_and_evaluate: too few training samples");

  const Mat gram_train = gram.k.submatrix(train_idx, train_idx);
  std::vector<std::array<double, 2>> y_train(train_idx.size());
  for (size_t i = 0; i < train_idx.size(); ++i) y_train[i] = labels.targets[train_idx[i]];

  if (cfg.use_cv) {
    const auto t0 = Clock::now();
    CvOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    opts.threads = cfg.threads;
    const CvResult cv = cross_validate(gram_train, y_train, cfg.grid, opts);
    res.hp_pitch = cv.best_pitch;
    res.hp_yaw = cv.best_yaw;
    res.cv_seconds = seconds_since(t0);
  } else {
    res.hp_pitch = cfg.hp_pitch;
    res.hp_yaw = cfg.hp_yaw;
    res.hp_pitch.tol = cfg.tol;
    res.hp_yaw.tol = cfg.tol;
    res.hp_pitch.max_iter = cfg.max_iter;
    res.hp_yaw.max_iter = cfg.max_iter;
  }

  {
    const auto t0 = Clock::now();
    std::vector<double> y(train_idx.size());
    const Mat k_pitch = kernel_from_gram(gram_train, res.hp_pitch.kernel);
    for (size_t i = 0; i < y.size(); ++i) y[i] = y_train[i][0];
    res.models.pitch_model = train(k_pitch, y, res.hp_pitch);
    res.models.pitch_model.target_kind = TargetKind::pitch;

    const bool same_kernel = res.hp_yaw.kernel.kind == res.hp_pitch.kernel.kind &&
                             res.hp_yaw.kernel.gamma == res.hp_pitch.kernel.gamma &&
                             res.hp_yaw.kernel.degree == res.hp_pitch.kernel.degree &&
                             res.hp_yaw.kernel.offset == res.hp_pitch.kernel.offset;
    const Mat k_yaw = same_kernel ? Mat() : kernel_from_gram(gram_train, res.hp_yaw.kernel);
    for (size_t i = 0; i < y.size(); ++i) y[i] = y_train[i][1];
    res.models.yaw_model = train(same_kernel ? k_pitch : k_yaw, y, res.hp_yaw);
    res.models.yaw_model.target_kind = TargetKind::yaw;
    res.train_seconds = seconds_since(t0);
  }

  if (!test_idx.empty()) {
    const auto t0 = Clock::now();
    res.predictions = predict_gaze(res.models, gram.k, test_idx, train_idx);
    res.predict_seconds = seconds_since(t0);
    res.truth.resize(test_idx.size());
    for (size_t i = 0; i < test_idx.size(); ++i) res.truth[i] = labels.targets[test_idx[i]];
    res.mae_degrees = mean_angular_error(res.predictions, res.truth);
  }
  return res;
}

}  // namespace rek
