#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rek/dense.hpp"
#include "rek/kernels.hpp"
#include "rek/protocol.hpp"

namespace rek {

struct SvrHyperparams {
  double C = 1.0;
  double epsilon = 0.1;
  KernelConfig kernel = KernelConfig::rbf(1.0);
  double tol = 1e-3;          // KKT tolerance
  uint64_t max_iter = 1000000;  // pair updates

  void validate() const {
    if (!(C > 0.0)) throw InvalidConfig("SVR requires C > 0");
    if (!(epsilon >= 0.0)) throw InvalidConfig("SVR requires epsilon >= 0");
    if (!(tol > 0.0)) throw InvalidConfig("SVR requires tol > 0");
    kernel.validate();
  }
};

enum class TargetKind : uint8_t { pitch = 0, yaw = 1 };

// Epsilon-insensitive SVR in dual form: f(x) = sum_i beta_i K(x_i, x) + bias
// with sum(beta) = 0 and |beta_i| <= C.
struct SvrModel {
  std::vector<double> beta;
  double bias = 0.0;
  std::vector<size_t> support_indices;  // beta_i != 0
  KernelConfig kernel;
  TargetKind target_kind = TargetKind::pitch;
  bool converged = true;  // false when max_iter was reached
  uint64_t iterations = 0;

  size_t n() const { return beta.size(); }
};

struct GazeModelPair {
  SvrModel pitch_model;
  SvrModel yaw_model;
};

// SMO over the dual with maximal-KKT-violation pair selection. K is the
// precomputed kernel on the training samples. When max_iter is reached the
// best iterate is returned with converged = false.
SvrModel train(const Mat& k, std::span<const double> y, const SvrHyperparams& hp);

// sum_i beta_i * k_row_i + bias
double predict(const SvrModel& model, std::span<const double> k_row);

// Predictions for every row of a (tests x train) kernel block.
std::vector<double> predict_block(const SvrModel& model, const Mat& k_rows);

// 0.5 b'Kb + eps*|b|_1 - y'b; exposed for solver soundness checks.
double dual_objective(const Mat& k, std::span<const double> y, double epsilon,
                      std::span<const double> beta);

struct CvGrid {
  std::vector<double> gammas;
  std::vector<double> Cs;
  std::vector<double> epsilons;

  // gamma in {2^-3..2^4}, C in {2^-3..2^3}, eps in {.005,.01,.05,.1,.5,1}
  static CvGrid paper();
  size_t size() const { return gammas.size() * Cs.size() * epsilons.size(); }
};

struct CvOptions {
  size_t folds = 5;
  double tol = 1e-3;
  uint64_t max_iter = 1000000;
  unsigned threads = 1;
};

struct CvCell {
  double gamma, C, epsilon;
  double mae_pitch, mae_yaw;  // mean fold MAE, radians
};

struct CvResult {
  SvrHyperparams best_pitch;
  SvrHyperparams best_yaw;
  std::vector<CvCell> table;
};

// Grid search by 5-fold cross-validation over contiguous folds of the
// already-shuffled training block. `gram_train` is the dot-product matrix of
// the training samples; RBF kernels per gamma are derived from it, so no
// communication with the input-parties is needed. Selects, independently per
// angle, the (gamma, C, epsilon) minimizing mean fold MAE.
CvResult cross_validate(const Mat& gram_train, const std::vector<std::array<double, 2>>& targets,
                        const CvGrid& grid, const CvOptions& opts = {});

// Mean over samples of arccos(g_pred . g_true) in degrees, with gaze vectors
// derived from (pitch, yaw).
double mean_angular_error(const std::vector<std::array<double, 2>>& pred,
                          const std::vector<std::array<double, 2>>& truth);

}  // namespace rek
