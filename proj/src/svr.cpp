#include "rek/svr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "rek/eyegen.hpp"

namespace rek {

namespace {

constexpr double kEtaFloor = 1e-12;

// All beta updates land on a power-of-two grid scaled to C. Every beta_i is
// then exactly representable and the pairwise +/- delta updates keep
// sum(beta) = 0 exactly in double arithmetic, including plain summation.
double update_grid(double c, size_t n) {
  int extra = 0;
  while ((n >> (11 + extra)) > 1) ++extra;
  return std::ldexp(1.0, std::ilogb(c) - 40 + extra);
}

struct PairSelection {
  double b_low = -std::numeric_limits<double>::infinity();
  double b_up = std::numeric_limits<double>::infinity();
  ptrdiff_t u = -1;  // raise beta[u]
  ptrdiff_t v = -1;  // lower beta[v]
};

// Maximal-KKT-violation pair: the largest lower bound on the bias that an
// index can still push up, against the smallest upper bound.
PairSelection select_pair(const std::vector<double>& beta, const std::vector<double>& g,
                          std::span<const double> y, double c, double eps) {
  PairSelection s;
  const size_t n = beta.size();
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - g[i];
    if (beta[i] < c) {
      const double lo = r + (beta[i] < 0.0 ? eps : -eps);
      if (lo > s.b_low) {
        s.b_low = lo;
        s.u = static_cast<ptrdiff_t>(i);
      }
    }
    if (beta[i] > -c) {
      const double up = r + (beta[i] > 0.0 ? -eps : eps);
      if (up < s.b_up) {
        s.b_up = up;
        s.v = static_cast<ptrdiff_t>(i);
      }
    }
  }
  return s;
}

SvrModel train_impl(const Mat& k, std::span<const double> y, const SvrHyperparams& hp,
                    bool check_symmetry) {
  hp.validate();
  const size_t n = k.rows();
  if (k.cols() != n) throw BadKernel("train: kernel matrix not square");
  if (n < 2) throw TooFewSamples("train: need at least 2 samples");
  if (y.size() != n) {
    throw DimensionMismatch("train: " + std::to_string(y.size()) + " targets for " +
                            std::to_string(n) + " kernel rows");
  }
  if (check_symmetry && k.max_asymmetry() > 1e-9) {
    throw BadKernel("train: kernel asymmetry beyond 1e-9");
  }

  const double eps = hp.epsilon;
  const double q = update_grid(hp.C, n);
  // Snap the box bound onto the update grid so saturated coordinates land on
  // it exactly and every remaining cap is at least one grid step.
  const double c = std::floor(hp.C / q) * q;

  std::vector<double> beta(n, 0.0);
  std::vector<double> g(n, 0.0);  // K * beta

  SvrModel model;
  model.kernel = hp.kernel;
  model.converged = false;

  uint64_t iter = 0;
  PairSelection sel;
  for (; iter < hp.max_iter; ++iter) {
    sel = select_pair(beta, g, y, c, eps);
    if (sel.u < 0 || sel.v < 0 || sel.b_low - sel.b_up <= hp.tol) {
      model.converged = true;
      break;
    }
    const auto u = static_cast<size_t>(sel.u);
    const auto v = static_cast<size_t>(sel.v);

    const double* ku = k.row(u);
    const double* kv = k.row(v);
    const double eta = std::max(ku[u] + kv[v] - 2.0 * ku[v], kEtaFloor);
    double delta = (sel.b_low - sel.b_up) / eta;

    // Box caps; moves across zero stop there because the epsilon term
    // changes slope.
    const double cap_u = beta[u] >= 0.0 ? c - beta[u] : -beta[u];
    const double cap_v = beta[v] > 0.0 ? beta[v] : c + beta[v];
    delta = std::min(delta, std::min(cap_u, cap_v));
    delta = std::floor(delta / q) * q;
    if (!(delta > 0.0)) {
      // Violation smaller than the update grid can express.
      model.converged = true;
      break;
    }

    beta[u] += delta;
    beta[v] -= delta;
    for (size_t i = 0; i < n; ++i) g[i] += delta * (ku[i] - kv[i]);
  }

  if (iter == hp.max_iter) sel = select_pair(beta, g, y, c, eps);
  model.iterations = iter;
  if (std::isfinite(sel.b_low) && std::isfinite(sel.b_up)) {
    model.bias = 0.5 * (sel.b_low + sel.b_up);
  } else if (std::isfinite(sel.b_low)) {
    model.bias = sel.b_low;
  } else if (std::isfinite(sel.b_up)) {
    model.bias = sel.b_up;
  }

  model.beta = std::move(beta);
  for (size_t i = 0; i < n; ++i) {
    if (model.beta[i] != 0.0) model.support_indices.push_back(i);
  }
  return model;
}

void parallel_for(size_t count, unsigned threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const unsigned n_workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
  pool.reserve(n_workers);
  for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

SvrModel train(const Mat& k, std::span<const double> y, const SvrHyperparams& hp) {
  return train_impl(k, y, hp, true);
}

double predict(const SvrModel& model, std::span<const double> k_row) {
  if (k_row.size() != model.n()) {
    throw DimensionMismatch("predict: k_row length " + std::to_string(k_row.size()) +
                            " vs model size " + std::to_string(model.n()));
  }
  double acc = model.bias;
  for (size_t idx : model.support_indices) acc += model.beta[idx] * k_row[idx];
  return acc;
}

std::vector<double> predict_block(const SvrModel& model, const Mat& k_rows) {
  std::vector<double> out(k_rows.rows());
  for (size_t i = 0; i < k_rows.rows(); ++i) {
    out[i] = predict(model, std::span<const double>(k_rows.row(i), k_rows.cols()));
  }
  return out;
}

double dual_objective(const Mat& k, std::span<const double> y, double epsilon,
                      std::span<const double> beta) {
  const size_t n = beta.size();
  double quad = 0.0, l1 = 0.0, lin = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double ki = 0.0;
    for (size_t j = 0; j < n; ++j) ki += k(i, j) * beta[j];
    quad += beta[i] * ki;
    l1 += std::fabs(beta[i]);
    lin += y[i] * beta[i];
  }
  return 0.5 * quad + epsilon * l1 - lin;
}

CvGrid CvGrid::paper() {
  CvGrid g;
  for (int e = -3; e <= 4; ++e) g.gammas.push_back(std::ldexp(1.0, e));
  for (int e = -3; e <= 3; ++e) g.Cs.push_back(std::ldexp(1.0, e));
  g.epsilons = {0.005, 0.01, 0.05, 0.1, 0.5, 1.0};
  return g;
}

namespace {

std::pair<size_t, size_t> fold_range(size_t n, size_t folds, size_t f) {
  return {f * n / folds, (f + 1) * n / folds};
}

}  // namespace

CvResult cross_validate(const Mat& gram_train, const std::vector<std::array<double, 2>>& targets,
                        const CvGrid& grid, const CvOptions& opts) {
  const size_t n = gram_train.rows();
  if (grid.size() == 0) throw GridEmpty("cross_validate: empty grid");
  if (gram_train.cols() != n || targets.size() != n) {
    throw DimensionMismatch("cross_validate: gram/target shape mismatch");
  }
  if (n < opts.folds) throw TooFewSamples("cross_validate: need at least one sample per fold");

  const size_t n_cells = grid.size();
  std::vector<double> sum_pitch(n_cells, 0.0), sum_yaw(n_cells, 0.0);

  for (size_t f = 0; f < opts.folds; ++f) {
    const auto [v0, v1] = fold_range(n, opts.folds, f);
    std::vector<size_t> tr_idx, va_idx;
    tr_idx.reserve(n - (v1 - v0));
    va_idx.reserve(v1 - v0);
    for (size_t i = 0; i < n; ++i) (i >= v0 && i < v1 ? va_idx : tr_idx).push_back(i);
    const size_t t = tr_idx.size(), v = va_idx.size();

    // Squared distances are gamma-independent; build once per fold.
    Mat d2_tr(t, t), d2_va(v, t);
    for (size_t i = 0; i < t; ++i) {
      const size_t gi = tr_idx[i];
      for (size_t j = 0; j < t; ++j) {
        const size_t gj = tr_idx[j];
        d2_tr(i, j) = squared_distance(gram_train(gi, gi), gram_train(gi, gj),
                                       gram_train(gj, gj));
      }
    }
    for (size_t i = 0; i < v; ++i) {
      const size_t gi = va_idx[i];
      for (size_t j = 0; j < t; ++j) {
        const size_t gj = tr_idx[j];
        d2_va(i, j) = squared_distance(gram_train(gi, gi), gram_train(gi, gj),
                                       gram_train(gj, gj));
      }
    }

    std::vector<double> y_tr[2], y_va[2];
    for (int a = 0; a < 2; ++a) {
      y_tr[a].resize(t);
      y_va[a].resize(v);
      for (size_t i = 0; i < t; ++i) y_tr[a][i] = targets[tr_idx[i]][static_cast<size_t>(a)];
      for (size_t i = 0; i < v; ++i) y_va[a][i] = targets[va_idx[i]][static_cast<size_t>(a)];
    }

    Mat k_tr(t, t), k_va(v, t);
    for (size_t gi = 0; gi < grid.gammas.size(); ++gi) {
      const double gamma = grid.gammas[gi];
      for (size_t idx = 0; idx < k_tr.size(); ++idx)
        k_tr.data()[idx] = std::exp(-gamma * d2_tr.data()[idx]);
      for (size_t idx = 0; idx < k_va.size(); ++idx)
        k_va.data()[idx] = std::exp(-gamma * d2_va.data()[idx]);

      // Independent (C, epsilon, angle) fits share the fold kernel read-only.
      const size_t combos = grid.Cs.size() * grid.epsilons.size();
      parallel_for(combos * 2, opts.threads, [&](size_t task) {
        const size_t combo = task / 2;
        const int angle = static_cast<int>(task % 2);
        const size_t ci = combo / grid.epsilons.size();
        const size_t ei = combo % grid.epsilons.size();
        SvrHyperparams hp;
        hp.C = grid.Cs[ci];
        hp.epsilon = grid.epsilons[ei];
        hp.kernel = KernelConfig::rbf(gamma);
        hp.tol = opts.tol;
        hp.max_iter = opts.max_iter;
        const SvrModel m = train_impl(k_tr, y_tr[angle], hp, false);
        const std::vector<double> pred = predict_block(m, k_va);
        double mae = 0.0;
        for (size_t i = 0; i < v; ++i) mae += std::fabs(pred[i] - y_va[angle][i]);
        mae /= static_cast<double>(v);
        const size_t cell = (gi * grid.Cs.size() + ci) * grid.epsilons.size() + ei;
        (angle == 0 ? sum_pitch : sum_yaw)[cell] = (angle == 0 ? sum_pitch : sum_yaw)[cell] + mae;
      });
    }
  }

  CvResult res;
  res.table.resize(n_cells);
  size_t best_p = 0, best_y = 0;
  for (size_t gi = 0; gi < grid.gammas.size(); ++gi) {
    for (size_t ci = 0; ci < grid.Cs.size(); ++ci) {
      for (size_t ei = 0; ei < grid.epsilons.size(); ++ei) {
        const size_t cell = (gi * grid.Cs.size() + ci) * grid.epsilons.size() + ei;
        res.table[cell] = CvCell{grid.gammas[gi], grid.Cs[ci], grid.epsilons[ei],
                                 sum_pitch[cell] / static_cast<double>(opts.folds),
                                 sum_yaw[cell] / static_cast<double>(opts.folds)};
        if (res.table[cell].mae_pitch < res.table[best_p].mae_pitch) best_p = cell;
        if (res.table[cell].mae_yaw < res.table[best_y].mae_yaw) best_y = cell;
      }
    }
  }

  auto to_hp = [&](const CvCell& cell) {
    SvrHyperparams hp;
    hp.C = cell.C;
    hp.epsilon = cell.epsilon;
    hp.kernel = KernelConfig::rbf(cell.gamma);
    hp.tol = opts.tol;
    hp.max_iter = opts.max_iter;
    return hp;
  };
  res.best_pitch = to_hp(res.table[best_p]);
  res.best_yaw = to_hp(res.table[best_y]);
  return res;
}

double mean_angular_error(const std::vector<std::array<double, 2>>& pred,
                          const std::vector<std::array<double, 2>>& truth) {
  if (pred.size() != truth.size()) {
    throw DimensionMismatch("mean_angular_error: " + std::to_string(pred.size()) + " vs " +
                            std::to_string(truth.size()));
  }
  if (pred.empty()) throw DimensionMismatch("mean_angular_error: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const auto a = angles_to_gaze(pred[i][0], pred[i][1]);
    const auto b = angles_to_gaze(truth[i][0], truth[i][1]);
    const double dot = std::clamp(a[0] * b[0] + a[1] * b[1] + a[2] * b[2], -1.0, 1.0);
    acc += std::acos(dot);
  }
  return acc / static_cast<double>(pred.size()) * 180.0 / M_PI;
}

}  // namespace rek
