// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria run in a wall-clock-friendly order; the summary
// at the end is printed in numeric order.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "../qp_oracle.hpp"
#include "rek/audit.hpp"
#include "rek/channel.hpp"
#include "rek/eyegen.hpp"
#include "rek/model_io.hpp"
#include "rek/pipeline.hpp"

using namespace rek;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  int number;
  std::string name;
  std::function<std::string()> run;  // returns "" on pass, reason on failure
};

struct Outcome {
  int number = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  std::string detail;
};

unsigned worker_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 2 : hw;
}

std::pair<RealDataset, RealDataset> party_datasets(size_t total, uint64_t seed) {
  EyeModelParams eye;
  eye.seed = derive_seed(seed, 101);
  RealDataset alice = generate_dataset(total / 2, eye);
  eye.seed = derive_seed(seed, 202);
  RealDataset bob = generate_dataset(total - total / 2, eye);
  return {std::move(alice), std::move(bob)};
}

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

// ---- criterion 1: private and plaintext grams identical at three sizes ----
std::string criterion_gram_equivalence() {
  const auto t0 = Clock::now();
  for (size_t size : {size_t{100}, size_t{1000}, size_t{5000}}) {
    const auto [alice, bob] = party_datasets(size, 1000 + size);
    SessionConfig cfg;
    cfg.seed = 31 + size;
    const double diff = check_gram_equivalence(alice, bob, cfg);
    if (diff != 0.0) {
      return format("size %zu: max |K_private - K_plain| = %.3g, expected exactly 0", size, diff);
    }
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  if (elapsed >= 60.0) return format("runtime %.1fs exceeds the 60s budget", elapsed);
  return "";
}

// ---- criterion 2: models trained on K_private and K_plain are identical ----
std::string criterion_model_equivalence() {
  const auto [alice, bob] = party_datasets(1250, 77);
  SessionConfig cfg;
  cfg.seed = 78;

  const LocalSessionResult session = run_session_local(alice, bob, cfg);
  const GramMatrix plain = reference_gram(alice, bob, cfg);

  FitConfig fit_cfg;
  fit_cfg.test_fraction = 0.2;
  fit_cfg.hp_pitch.kernel = KernelConfig::rbf(2.0);
  fit_cfg.hp_pitch.C = 1.0;
  fit_cfg.hp_pitch.epsilon = 0.01;
  fit_cfg.hp_yaw = fit_cfg.hp_pitch;

  const FitResult private_fit = fit_and_evaluate(session.server.gram, session.server.labels,
                                                 fit_cfg);
  const FitResult plain_fit = fit_and_evaluate(plain, session.server.labels, fit_cfg);

  if (private_fit.split.train.size() != 1000 || private_fit.split.test.size() != 250) {
    return format("split is %zu/%zu, expected 1000/250", private_fit.split.train.size(),
                  private_fit.split.test.size());
  }
  if (private_fit.predictions != plain_fit.predictions) {
    return "predictions differ between the private and plaintext kernels";
  }
  if (private_fit.mae_degrees != plain_fit.mae_degrees) {
    return format("MAE differs: %.17g vs %.17g", private_fit.mae_degrees,
                  plain_fit.mae_degrees);
  }
  return "";
}

// ---- criterion 3: accuracy after CV on the published grids ----
std::string criterion_accuracy() {
  const auto [alice, bob] = party_datasets(5000, 55);
  SessionConfig cfg;
  cfg.seed = 56;
  const LocalSessionResult session = run_session_local(alice, bob, cfg);
  const GramMatrix& gram = session.server.gram;
  const LabelVector& labels = session.server.labels;

  FitConfig fit_cfg;
  fit_cfg.test_fraction = 0.2;
  fit_cfg.use_cv = true;
  fit_cfg.threads = worker_threads();

  std::printf("      [3] cross-validating at 4000 train samples (grid of %zu)...\n",
              fit_cfg.grid.size());
  std::fflush(stdout);
  const FitResult full = fit_and_evaluate(gram, labels, fit_cfg);
  std::printf("      [3] 4000-train: mae %.4f deg, pitch %s C=%g eps=%g (cv %.0fs)\n",
              full.mae_degrees, full.hp_pitch.kernel.describe().c_str(), full.hp_pitch.C,
              full.hp_pitch.epsilon, full.cv_seconds);
  std::fflush(stdout);

  // Same test block, quarter of the training data, balanced across parties.
  const Split split = full.split;
  std::vector<size_t> small_train;
  size_t alice_taken = 0, bob_taken = 0;
  for (size_t idx : split.train) {
    if (idx < gram.n_a) {
      if (alice_taken < 500) {
        small_train.push_back(idx);
        ++alice_taken;
      }
    } else if (bob_taken < 500) {
      small_train.push_back(idx);
      ++bob_taken;
    }
  }

  const Mat gram_small = gram.k.submatrix(small_train, small_train);
  std::vector<std::array<double, 2>> y_small(small_train.size());
  for (size_t i = 0; i < small_train.size(); ++i) y_small[i] = labels.targets[small_train[i]];

  std::printf("      [3] cross-validating at 1000 train samples...\n");
  std::fflush(stdout);
  CvOptions opts;
  opts.threads = worker_threads();
  const CvResult cv_small = cross_validate(gram_small, y_small, CvGrid::paper(), opts);

  GazeModelPair small_models;
  {
    std::vector<double> y(small_train.size());
    const Mat k = kernel_from_gram(gram_small, cv_small.best_pitch.kernel);
    for (size_t i = 0; i < y.size(); ++i) y[i] = y_small[i][0];
    small_models.pitch_model = train(k, y, cv_small.best_pitch);
    const Mat k_yaw = cv_small.best_yaw.kernel.gamma == cv_small.best_pitch.kernel.gamma
                          ? k
                          : kernel_from_gram(gram_small, cv_small.best_yaw.kernel);
    for (size_t i = 0; i < y.size(); ++i) y[i] = y_small[i][1];
    small_models.yaw_model = train(k_yaw, y, cv_small.best_yaw);
  }
  const auto small_pred = predict_gaze(small_models, gram.k, split.test, small_train);
  std::vector<std::array<double, 2>> truth(split.test.size());
  for (size_t i = 0; i < split.test.size(); ++i) truth[i] = labels.targets[split.test[i]];
  const double mae_small = mean_angular_error(small_pred, truth);
  std::printf("      [3] 1000-train: mae %.4f deg\n", mae_small);
  std::fflush(stdout);

  if (!(full.mae_degrees <= 1.0)) {
    return format("MAE %.4f deg at 4000 train exceeds 1.0 deg", full.mae_degrees);
  }
  if (!(full.mae_degrees <= mae_small + 0.05)) {
    return format("no monotone trend: %.4f deg (4000) vs %.4f deg (1000)", full.mae_degrees,
                  mae_small);
  }
  return "";
}

// ---- criterion 4: DARE correctness at scale ----
std::string criterion_dare() {
  const auto t0 = Clock::now();
  Mt19937Source src(404);
  for (int i = 0; i < 100000; ++i) {
    const RingElement x1 = sample_uniform(src), x2 = sample_uniform(src);
    const MulEncoding c = encode_mul(x1, x2, MulRandomness::sample(src));
    if (recover_mul(c) != x1 * x2) return format("mul round-trip failed at trial %d", i);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    RingVector x(36), y(36);
    for (auto& e : x) e = sample_uniform(src);
    for (auto& e : y) e = sample_uniform(src);
    const DotRandomness r = DotRandomness::sample(36, src);
    RingElement expected{0};
    for (size_t d = 0; d < 36; ++d) expected += x[d] * y[d];
    const auto [c1, c3] = encode_dot_left(x, r);
    const auto [c2, c4] = encode_dot_right(y, r);
    if (recover_dot(c1, c2, c3, c4) != expected) {
      return format("dot round-trip failed at trial %d", trial);
    }
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  if (elapsed >= 10.0) return format("runtime %.1fs exceeds the 10s budget", elapsed);
  return "";
}

// ---- criterion 5: privacy statistics ----
std::string criterion_privacy_stats() {
  RealDataset alice, bob;
  alice.n_f = bob.n_f = 6;
  alice.n = bob.n = 3;
  alice.features.resize(18);
  bob.features.resize(18);
  Mt19937Source src(505);
  for (auto& x : alice.features) x = uniform_in(src, -1.0, 1.0);
  for (auto& x : bob.features) x = uniform_in(src, -1.0, 1.0);
  alice.labels.targets.assign(3, {0.0, 0.0});
  bob.labels.targets.assign(3, {0.0, 0.0});

  const ViewSamples fresh = collect_views(alice, bob, 10000, 506, 20, false);
  const UniformityReport ok = check_view_uniformity(fresh, 10000);
  if (ok.pass_fraction() < 0.95) {
    return format("uniformity pass fraction %.3f < 0.95 (min p %.3g)", ok.pass_fraction(),
                  ok.min_p);
  }

  const ViewSamples zeroed = collect_views(alice, bob, 10000, 506, 20, true);
  const UniformityReport leak = check_view_uniformity(zeroed, 10000);
  if (!leak.leak_flagged()) return "zeroed-randomness hook was not flagged as failing";

  const SimulatorReport sim = check_simulator_indistinguishability(100000, 25, 507);
  if (sim.pass_fraction() < 0.95) {
    return format("simulator KS pass fraction %.3f < 0.95 over %zu tests", sim.pass_fraction(),
                  sim.tests);
  }
  return "";
}

// ---- criterion 6: communication accounting ----
std::string criterion_bytes() {
  for (size_t n : {size_t{1}, size_t{50}, size_t{2500}}) {
    const auto [alice, bob] = party_datasets(2 * n, 600 + n);
    SessionConfig cfg;
    cfg.seed = 601 + n;
    const LocalSessionResult res = run_session_local(alice, bob, cfg);
    const uint64_t measured =
        res.alice.sent.protocol_bytes + res.bob.sent.protocol_bytes;
    const uint64_t expected = communication_bytes(36, n, n, 8);
    if (measured != expected) {
      return format("(n_a,n_b)=(%zu,%zu): measured %llu bytes, formula %llu", n, n,
                    static_cast<unsigned long long>(measured),
                    static_cast<unsigned long long>(expected));
    }
  }
  return "";
}

// ---- criterion 7: prediction throughput ----
std::string criterion_throughput() {
  const auto [alice, bob] = party_datasets(5000, 700);
  SessionConfig cfg;
  cfg.seed = 701;
  const LocalSessionResult session = run_session_local(alice, bob, cfg);

  FitConfig fit_cfg;
  fit_cfg.test_fraction = 0.2;
  fit_cfg.hp_pitch.kernel = KernelConfig::rbf(1.0);
  fit_cfg.hp_pitch.C = 1.0;
  fit_cfg.hp_pitch.epsilon = 0.01;
  fit_cfg.hp_yaw = fit_cfg.hp_pitch;
  const FitResult fit = fit_and_evaluate(session.server.gram, session.server.labels, fit_cfg);
  if (fit.split.train.size() != 4000 || fit.split.test.size() != 1000) {
    return format("split is %zu/%zu, expected 4000/1000", fit.split.train.size(),
                  fit.split.test.size());
  }

  // Timed single-threaded prediction of all 1000 held-out samples,
  // including the kernel evaluations against all 4000 training samples.
  const auto t0 = Clock::now();
  const auto pred = predict_gaze(fit.models, session.server.gram.k, fit.split.test,
                                 fit.split.train);
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("      [7] predicted %zu samples in %.3fs (%.3f ms/sample)\n", pred.size(),
              elapsed, elapsed * 1000.0 / static_cast<double>(pred.size()));
  if (elapsed >= 5.0) return format("prediction took %.2fs, budget 5s", elapsed);
  return "";
}

// ---- criterion 8: solver soundness against the projected-gradient oracle ----
std::string criterion_solver() {
  Mt19937Source src(808);
  for (int inst = 0; inst < 25; ++inst) {
    const size_t n = 15 + static_cast<size_t>(src.next_u64() % 36);  // 15..50
    const size_t n_f = 3;
    std::vector<std::vector<double>> x(n, std::vector<double>(n_f));
    for (auto& row : x)
      for (auto& v : row) v = uniform_in(src, -1.5, 1.5);
    const double gamma = uniform_in(src, 0.3, 2.0);
    Mat k(n, n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        double d2 = 0.0;
        for (size_t d = 0; d < n_f; ++d) d2 += (x[i][d] - x[j][d]) * (x[i][d] - x[j][d]);
        k(i, j) = std::exp(-gamma * d2);
      }
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) y[i] = std::sin(2.0 * x[i][0]) + 0.4 * x[i][1] * x[i][2];

    SvrHyperparams hp;
    hp.C = uniform_in(src, 0.3, 4.0);
    hp.epsilon = (inst % 4 == 0) ? 0.0 : uniform_in(src, 0.005, 0.1);
    hp.tol = 1e-4;

    const SvrModel m = train(k, y, hp);
    const auto oracle = rek::testing::solve_svr_qp(k, y, hp.C, hp.epsilon);
    const double gap = dual_objective(k, y, hp.epsilon, m.beta) - oracle.objective;
    if (gap > 1e-4) return format("instance %d (n=%zu): dual gap %.3g > 1e-4", inst, n, gap);

    for (size_t i = 0; i < n; ++i) {
      std::vector<double> row(n);
      for (size_t j = 0; j < n; ++j) row[j] = k(i, j);
      double f_oracle = oracle.bias;
      for (size_t j = 0; j < n; ++j) f_oracle += oracle.beta[j] * row[j];
      const double diff = std::fabs(predict(m, row) - f_oracle);
      if (diff > 1e-3) {
        return format("instance %d: prediction disagreement %.3g > 1e-3", inst, diff);
      }
    }
  }
  return "";
}

// ---- criterion 9: transport transparency ----
std::string criterion_transport() {
  const auto [alice, bob] = party_datasets(400, 900);
  SessionConfig cfg;
  cfg.seed = 901;

  const LocalSessionResult local = run_session_local(alice, bob, cfg);

  TcpListener server_listener("127.0.0.1", 0);
  TcpListener bob_listener("127.0.0.1", 0);
  PartyStats alice_stats, bob_stats;
  ServerResult tcp_res;
  std::exception_ptr err;

  std::thread server_thread([&] {
    try {
      auto a = server_listener.accept();
      auto b = server_listener.accept();
      tcp_res = run_server(*a, *b, cfg);
    } catch (...) {
      err = std::current_exception();
    }
  });
  std::thread bob_thread([&] {
    try {
      auto to_server = TcpChannel::connect("127.0.0.1", server_listener.port());
      auto from_alice = bob_listener.accept();
      bob_stats = run_bob(*from_alice, *to_server, bob, cfg);
    } catch (...) {
      err = std::current_exception();
    }
  });
  auto to_bob = TcpChannel::connect("127.0.0.1", bob_listener.port());
  auto to_server = TcpChannel::connect("127.0.0.1", server_listener.port());
  alice_stats = run_alice(*to_bob, *to_server, alice, cfg);
  server_thread.join();
  bob_thread.join();
  if (err) std::rethrow_exception(err);

  if (checksum(tcp_res.gram.k) != checksum(local.server.gram.k)) {
    return "gram checksums differ between tcp and in-process transports";
  }
  const uint64_t tcp_bytes = alice_stats.sent.protocol_bytes + bob_stats.sent.protocol_bytes;
  const uint64_t local_bytes =
      local.alice.sent.protocol_bytes + local.bob.sent.protocol_bytes;
  if (tcp_bytes != local_bytes) {
    return format("protocol bytes differ: tcp %llu vs local %llu",
                  static_cast<unsigned long long>(tcp_bytes),
                  static_cast<unsigned long long>(local_bytes));
  }

  FitConfig fit_cfg;
  fit_cfg.hp_pitch.kernel = KernelConfig::rbf(1.0);
  fit_cfg.hp_pitch.C = 0.5;
  fit_cfg.hp_pitch.epsilon = 0.01;
  fit_cfg.hp_yaw = fit_cfg.hp_pitch;
  const FitResult fit_tcp = fit_and_evaluate(tcp_res.gram, tcp_res.labels, fit_cfg);
  const FitResult fit_local = fit_and_evaluate(local.server.gram, local.server.labels, fit_cfg);
  const ModelFile m_tcp = persist_models(fit_tcp.models, fit_tcp.hp_pitch, fit_tcp.hp_yaw,
                                         cfg.frac_bits, 36, nullptr);
  const ModelFile m_local = persist_models(fit_local.models, fit_local.hp_pitch,
                                           fit_local.hp_yaw, cfg.frac_bits, 36, nullptr);
  if (!models_equivalent(m_tcp, m_local)) {
    return "trained models differ between tcp and in-process transports";
  }
  return "";
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {4, "DARE correctness (1e5 mul, 1e3 dot sessions)", criterion_dare},
      {6, "communication bytes match the closed form", criterion_bytes},
      {1, "gram equivalence at sizes 100/1000/5000", criterion_gram_equivalence},
      {2, "model equivalence on private vs plaintext kernels", criterion_model_equivalence},
      {5, "privacy statistics (uniformity, hook, simulator)", criterion_privacy_stats},
      {8, "SMO matches the projected-gradient QP oracle", criterion_solver},
      {9, "transport transparency (tcp vs in-process)", criterion_transport},
      {7, "prediction throughput (1000 x 4000 under 5s)", criterion_throughput},
      {3, "accuracy after CV on the published grids", criterion_accuracy},
  };

  std::vector<Outcome> outcomes;
  for (const auto& c : criteria) {
    std::printf("[ RUN] criterion %d: %s\n", c.number, c.name.c_str());
    std::fflush(stdout);
    Outcome out;
    out.number = c.number;
    out.name = c.name;
    const auto t0 = Clock::now();
    try {
      out.detail = c.run();
      out.passed = out.detail.empty();
    } catch (const std::exception& e) {
      out.passed = false;
      out.detail = std::string("exception: ") + e.what();
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("[%s] criterion %d (%.1fs)%s%s\n", out.passed ? "PASS" : "FAIL", out.number,
                out.seconds, out.detail.empty() ? "" : " — ", out.detail.c_str());
    std::fflush(stdout);
    outcomes.push_back(std::move(out));
  }

  std::sort(outcomes.begin(), outcomes.end(),
            [](const Outcome& a, const Outcome& b) { return a.number < b.number; });
  std::printf("\n==== acceptance summary ====\n");
  bool all_passed = true;
  for (const auto& out : outcomes) {
    std::printf("criterion %d: %s — %s (%.1fs)\n", out.number, out.passed ? "PASS" : "FAIL",
                out.name.c_str(), out.seconds);
    all_passed = all_passed && out.passed;
  }
  std::printf("%s\n", all_passed ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
  return all_passed ? 0 : 1;
}
