// rek: privacy-preserving gram-matrix computation and SVR gaze estimation.
//
// Exit codes: 0 success, 2 configuration error, 3 protocol/transport error,
// 4 numerical failure.

#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "rek/audit.hpp"
#include "rek/channel.hpp"
#include "rek/eyegen.hpp"
#include "rek/model_io.hpp"
#include "rek/pipeline.hpp"
#include "rek/session.hpp"

namespace {

using namespace rek;

constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitNumerical = 4;

struct CommonOpts {
  uint64_t seed = 1;
  uint32_t frac_bits = FixedPointCodec::kDefaultFracBits;
  std::string session_hex;
  CLI::Option* seed_opt = nullptr;

  SessionConfig session_config() const {
    SessionConfig cfg;
    cfg.seed = seed;
    cfg.frac_bits = frac_bits;
    if (!session_hex.empty()) {
      cfg.session = parse_session_id(session_hex);
      // Session pinned explicitly and no seed given: deployment mode, local
      // randomness (shuffles, masks) comes from OS entropy.
      cfg.os_entropy = seed_opt != nullptr && seed_opt->count() == 0;
    }
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  opts.seed_opt = cmd->add_option("--seed", opts.seed, "session seed shared by all roles");
  cmd->add_option("--frac-bits", opts.frac_bits, "fixed-point fractional bits")
      ->check(CLI::Range(1u, 31u));
  cmd->add_option("--session", opts.session_hex,
                  "session id as 32 hex chars (default: derived from seed; without --seed, "
                  "local randomness switches to OS entropy)");
}

struct HyperOpts {
  double gamma = 1.0;
  double C = 1.0;
  double epsilon = 0.01;
  double tol = 1e-3;
  uint64_t max_iter = 1000000;
  bool use_cv = false;

  SvrHyperparams hp() const {
    SvrHyperparams h;
    h.C = C;
    h.epsilon = epsilon;
    h.kernel = KernelConfig::rbf(gamma);
    h.tol = tol;
    h.max_iter = max_iter;
    return h;
  }
};

void add_hyper(CLI::App* cmd, HyperOpts& opts) {
  cmd->add_option("--gamma", opts.gamma, "RBF gamma");
  cmd->add_option("--C", opts.C, "SVR penalty C");
  cmd->add_option("--epsilon", opts.epsilon, "SVR tube width");
  cmd->add_option("--tol", opts.tol, "KKT tolerance");
  cmd->add_option("--max-iter", opts.max_iter, "max SMO pair updates");
  cmd->add_flag("--cv", opts.use_cv, "grid-search hyperparameters by 5-fold CV");
}

FitConfig make_fit_config(const HyperOpts& hyper, double test_fraction, unsigned threads) {
  FitConfig cfg;
  cfg.test_fraction = test_fraction;
  cfg.use_cv = hyper.use_cv;
  cfg.hp_pitch = hyper.hp();
  cfg.hp_yaw = hyper.hp();
  cfg.tol = hyper.tol;
  cfg.max_iter = hyper.max_iter;
  cfg.threads = threads;
  return cfg;
}

void print_fit(const FitResult& fit) {
  std::printf("train samples:   %zu\n", fit.split.train.size());
  std::printf("test samples:    %zu\n", fit.split.test.size());
  std::printf("pitch model:     %s C=%g eps=%g (%zu SVs, %s)\n",
              fit.hp_pitch.kernel.describe().c_str(), fit.hp_pitch.C, fit.hp_pitch.epsilon,
              fit.models.pitch_model.support_indices.size(),
              fit.models.pitch_model.converged ? "converged" : "NOT converged");
  std::printf("yaw model:       %s C=%g eps=%g (%zu SVs, %s)\n",
              fit.hp_yaw.kernel.describe().c_str(), fit.hp_yaw.C, fit.hp_yaw.epsilon,
              fit.models.yaw_model.support_indices.size(),
              fit.models.yaw_model.converged ? "converged" : "NOT converged");
  if (!fit.split.test.empty()) std::printf("mae:             %.6f deg\n", fit.mae_degrees);
}

// Quantized feature lookup for persisting standalone-usable models out of a
// local all-plaintext run.
struct LocalFeatureTable {
  std::vector<double> features;  // pooled train-index-major, quantized
  size_t n_f = 0;

  FeatureLookup lookup() const {
    return [this](size_t train_index) -> const double* {
      return features.data() + train_index * n_f;
    };
  }
};

LocalFeatureTable build_feature_table(const RealDataset& alice_shuffled,
                                      const RealDataset& bob_shuffled, const Split& split,
                                      uint32_t frac_bits) {
  const FixedPointCodec codec(frac_bits);
  LocalFeatureTable table;
  table.n_f = alice_shuffled.n_f;
  table.features.resize(split.train.size() * table.n_f);
  for (size_t i = 0; i < split.train.size(); ++i) {
    const size_t global = split.train[i];
    const RealDataset& src = global < alice_shuffled.n ? alice_shuffled : bob_shuffled;
    const size_t col = global < alice_shuffled.n ? global : global - alice_shuffled.n;
    for (size_t d = 0; d < table.n_f; ++d) {
      table.features[i * table.n_f + d] = codec.quantize(src.at(d, col));
    }
  }
  return table;
}

int cmd_gen(size_t n, uint64_t seed, double noise_std, const std::string& out,
            const std::string& csv) {
  EyeModelParams params;
  params.seed = seed;
  params.landmark_noise_std = noise_std;
  const RealDataset data = generate_dataset(n, params);
  write_rekd(out, data);
  if (!csv.empty()) write_csv(csv, data);
  std::printf("wrote %zu samples (%zu features) to %s\n", data.n, data.n_f, out.c_str());
  std::printf("checksum: %s\n", hex64(file_checksum(out)).c_str());
  return 0;
}

int cmd_run_local(const std::string& alice_path, const std::string& bob_path,
                  const CommonOpts& common, const HyperOpts& hyper, double test_fraction,
                  unsigned threads, const std::string& report_path,
                  const std::string& model_out, bool insecure_plaintext) {
  const RealDataset alice = read_rekd(alice_path);
  const RealDataset bob = read_rekd(bob_path);
  const SessionConfig cfg = common.session_config();

  const LocalSessionResult session = run_session_local(alice, bob, cfg);
  std::printf("gram checksum:   %s\n", hex64(checksum(session.server.gram.k)).c_str());
  std::printf("protocol bytes:  %llu\n",
              static_cast<unsigned long long>(session.alice.sent.protocol_bytes +
                                              session.bob.sent.protocol_bytes));

  const FitConfig fit_cfg = make_fit_config(hyper, test_fraction, threads);
  const FitResult fit = fit_and_evaluate(session.server.gram, session.server.labels, fit_cfg);
  print_fit(fit);

  double mae_plain = fit.mae_degrees;
  if (insecure_plaintext) {
    const GramMatrix plain = reference_gram(alice, bob, cfg);
    const FitResult plain_fit = fit_and_evaluate(plain, session.server.labels, fit_cfg);
    mae_plain = plain_fit.mae_degrees;
    std::printf("mae (plaintext): %.6f deg\n", mae_plain);
    if (session.server.gram.k.max_abs_diff(plain.k) != 0.0) {
      std::fprintf(stderr, "gram mismatch between private and plaintext pipelines\n");
      return kExitNumerical;
    }
  }

  if (!report_path.empty()) {
    BenchReport rep;
    rep.size = alice.n + bob.n;
    rep.n_a = alice.n;
    rep.n_b = bob.n;
    rep.n_f = alice.n_f;
    rep.frac_bits = cfg.frac_bits;
    rep.repetitions = 1;
    rep.alice_encode_mean = session.alice.encode_seconds;
    rep.bob_encode_mean = session.bob.encode_seconds;
    rep.server_assemble_mean = session.server.assemble_seconds;
    rep.server_train_mean = fit.train_seconds + fit.cv_seconds;
    rep.server_predict_total_mean = fit.predict_seconds;
    rep.per_sample_predict_ms =
        fit.split.test.empty()
            ? 0.0
            : fit.predict_seconds * 1000.0 / static_cast<double>(fit.split.test.size());
    rep.protocol_bytes =
        session.alice.sent.protocol_bytes + session.bob.sent.protocol_bytes;
    rep.auxiliary_bytes =
        session.alice.sent.auxiliary_bytes + session.bob.sent.auxiliary_bytes;
    rep.framing_bytes = session.alice.sent.framing_bytes + session.bob.sent.framing_bytes;
    rep.mae_private = fit.mae_degrees;
    rep.mae_plaintext = mae_plain;
    rep.hyperparams = fit.hp_pitch.kernel.describe() + " C=" + std::to_string(fit.hp_pitch.C) +
                      " eps=" + std::to_string(fit.hp_pitch.epsilon);
    write_bench_csv(report_path, {rep});
    std::printf("report:          %s\n", report_path.c_str());
  }

  if (!model_out.empty()) {
    RealDataset a = alice, b = bob;
    shuffle_dataset(a, cfg.shuffle_seed(Role::left));
    shuffle_dataset(b, cfg.shuffle_seed(Role::right));
    const LocalFeatureTable table = build_feature_table(a, b, fit.split, cfg.frac_bits);
    const ModelFile file = persist_models(fit.models, fit.hp_pitch, fit.hp_yaw, cfg.frac_bits,
                                          alice.n_f, table.lookup());
    write_rekm(model_out, file);
    std::printf("model:           %s\n", model_out.c_str());
  }
  return 0;
}

int cmd_party(const std::string& role_name_str, const std::string& data_path,
              const std::string& server_ep, const std::string& peer_ep,
              const std::string& listen_ep, const CommonOpts& common) {
  const RealDataset data = read_rekd(data_path);
  const SessionConfig cfg = common.session_config();

  const auto [server_host, server_port] = parse_endpoint(server_ep);
  if (role_name_str == "alice") {
    if (peer_ep.empty()) throw InvalidConfig("alice requires --peer host:port for bob");
    const auto [bob_host, bob_port] = parse_endpoint(peer_ep);
    auto to_bob = TcpChannel::connect(bob_host, bob_port);
    auto to_server = TcpChannel::connect(server_host, server_port);
    const PartyStats stats = run_alice(*to_bob, *to_server, data, cfg);
    std::printf("alice done: encode %.4fs, protocol bytes %llu\n", stats.encode_seconds,
                static_cast<unsigned long long>(stats.sent.protocol_bytes));
    return 0;
  }
  if (role_name_str == "bob") {
    if (listen_ep.empty()) throw InvalidConfig("bob requires --listen host:port for alice");
    const auto [host, port] = parse_endpoint(listen_ep);
    TcpListener listener(host, port);
    auto to_server = TcpChannel::connect(server_host, server_port);
    auto from_alice = listener.accept();
    const PartyStats stats = run_bob(*from_alice, *to_server, data, cfg);
    std::printf("bob done: encode %.4fs, protocol bytes %llu\n", stats.encode_seconds,
                static_cast<unsigned long long>(stats.sent.protocol_bytes));
    return 0;
  }
  throw InvalidConfig("role must be alice or bob, got " + role_name_str);
}

int cmd_server(const std::string& listen_ep, const CommonOpts& common, const HyperOpts& hyper,
               double test_fraction, unsigned threads, const std::string& report_path,
               const std::string& model_out) {
  const SessionConfig cfg = common.session_config();
  const auto [host, port] = parse_endpoint(listen_ep);
  TcpListener listener(host, port);
  std::printf("server listening on %s:%u (session %s)\n", host.c_str(), listener.port(),
              session_id_hex(cfg.session_id()).c_str());
  std::fflush(stdout);

  auto party_a = listener.accept();
  auto party_b = listener.accept();
  const ServerResult result = run_server(*party_a, *party_b, cfg);

  std::printf("gram checksum:   %s\n", hex64(checksum(result.gram.k)).c_str());
  std::printf("protocol bytes:  %llu\n",
              static_cast<unsigned long long>(result.session_protocol_bytes()));

  const FitConfig fit_cfg = make_fit_config(hyper, test_fraction, threads);
  const FitResult fit = fit_and_evaluate(result.gram, result.labels, fit_cfg);
  print_fit(fit);

  if (!report_path.empty()) {
    BenchReport rep;
    rep.size = result.gram.n();
    rep.n_a = result.gram.n_a;
    rep.n_b = result.gram.n_b;
    rep.n_f = 0;
    rep.frac_bits = cfg.frac_bits;
    rep.repetitions = 1;
    rep.server_assemble_mean = result.assemble_seconds;
    rep.server_train_mean = fit.train_seconds + fit.cv_seconds;
    rep.server_predict_total_mean = fit.predict_seconds;
    rep.protocol_bytes = result.received.protocol_bytes;
    rep.auxiliary_bytes = result.received.auxiliary_bytes;
    rep.framing_bytes = result.received.framing_bytes;
    rep.mae_private = fit.mae_degrees;
    rep.mae_plaintext = fit.mae_degrees;
    write_bench_csv(report_path, {rep});
  }

  if (!model_out.empty()) {
    // The function-party never sees features, so the persisted model is
    // gram-backed: usable for audits and comparisons, not for standalone
    // prediction on raw samples.
    const ModelFile file = persist_models(fit.models, fit.hp_pitch, fit.hp_yaw, cfg.frac_bits,
                                          0, nullptr);
    write_rekm(model_out, file);
    std::printf("model:           %s (gram-backed, no support features)\n", model_out.c_str());
  }
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path) {
  const ModelFile model = read_rekm(model_path);
  const RealDataset test = read_rekd(data_path);
  const auto predictions = predict_standalone(model, test);
  const double mae = mean_angular_error(predictions, test.labels.targets);
  std::printf("predicted %zu samples\n", test.n);
  std::printf("mae:             %.6f deg\n", mae);
  return 0;
}

int cmd_bench(const std::vector<size_t>& sizes, const BenchConfig& cfg,
              const std::string& report_path) {
  const auto reports = run_benchmark(sizes, cfg);
  std::printf("%s", bench_table(reports).c_str());
  if (!report_path.empty()) {
    write_bench_csv(report_path, reports);
    std::printf("report: %s\n", report_path.c_str());
  }
  return 0;
}

int cmd_audit_uniformity(size_t trials, uint64_t seed, bool zero_randomness) {
  EyeModelParams eye;
  eye.seed = derive_seed(seed, 11);
  RealDataset alice = generate_dataset(4, eye);
  eye.seed = derive_seed(seed, 22);
  RealDataset bob = generate_dataset(4, eye);

  const ViewSamples views = collect_views(alice, bob, trials, seed, 20, zero_randomness);
  const UniformityReport report = check_view_uniformity(views, trials);
  std::printf("coordinates:     %zu\n", report.coordinates);
  std::printf("passed:          %zu (%.2f%%)\n", report.passed, 100.0 * report.pass_fraction());
  std::printf("min p-value:     %.6g\n", report.min_p);
  std::printf("verdict:         %s\n", report.leak_flagged() ? "LEAK FLAGGED" : "ok");
  return report.leak_flagged() && !zero_randomness ? kExitNumerical : 0;
}

int cmd_audit_equivalence(size_t n, uint64_t seed, uint32_t frac_bits) {
  EyeModelParams eye;
  eye.seed = derive_seed(seed, 33);
  RealDataset alice = generate_dataset(n / 2, eye);
  eye.seed = derive_seed(seed, 44);
  RealDataset bob = generate_dataset(n - n / 2, eye);

  SessionConfig cfg;
  cfg.seed = seed;
  cfg.frac_bits = frac_bits;
  const double diff = check_gram_equivalence(alice, bob, cfg);
  std::printf("max |K_private - K_plain| = %.17g\n", diff);
  return diff == 0.0 ? 0 : kExitNumerical;
}

int cmd_audit_simulator(size_t draws, size_t pairs, uint64_t seed) {
  const SimulatorReport report = check_simulator_indistinguishability(draws, pairs, seed);
  std::printf("tests:           %zu\n", report.tests);
  std::printf("passed:          %zu (%.2f%%)\n", report.passed, 100.0 * report.pass_fraction());
  std::printf("min p-value:     %.6g\n", report.min_p);
  return report.pass_fraction() >= 0.95 ? 0 : kExitNumerical;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"privacy-preserving gram computation and SVR gaze estimation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic landmark dataset");
  size_t gen_n = 1000;
  uint64_t gen_seed = 1;
  double gen_noise = 0.0;
  std::string gen_out, gen_csv;
  gen->add_option("--n", gen_n, "sample count")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--noise-std", gen_noise, "landmark noise std (model units)");
  gen->add_option("--out", gen_out, "output .rekd path")->required();
  gen->add_option("--csv", gen_csv, "also export CSV to this path");

  // run-local
  auto* local = app.add_subcommand("run-local", "run all three roles in-process");
  std::string local_alice, local_bob, local_report, local_model;
  CommonOpts local_common;
  HyperOpts local_hyper;
  double local_test_fraction = 0.2;
  unsigned local_threads = std::thread::hardware_concurrency();
  bool local_plain = false;
  local->add_option("--alice", local_alice, "alice dataset (.rekd)")->required();
  local->add_option("--bob", local_bob, "bob dataset (.rekd)")->required();
  add_common(local, local_common);
  add_hyper(local, local_hyper);
  local->add_option("--test-fraction", local_test_fraction, "held-out fraction per party");
  local->add_option("--threads", local_threads, "CV worker threads");
  local->add_option("--report", local_report, "write a one-row CSV report");
  local->add_option("--model-out", local_model, "persist the trained models (.rekm)");
  local->add_flag("--insecure-plaintext", local_plain,
                  "also run the plaintext pipeline and compare");

  // party
  auto* party = app.add_subcommand("party", "run one input-party over TCP");
  std::string party_role, party_data, party_server, party_peer, party_listen;
  CommonOpts party_common;
  party->add_option("--role", party_role, "alice | bob")->required();
  party->add_option("--data", party_data, "party dataset (.rekd)")->required();
  party->add_option("--server", party_server, "server endpoint host:port")->required();
  party->add_option("--peer", party_peer, "bob endpoint (alice only)");
  party->add_option("--listen", party_listen, "listen endpoint for alice (bob only)");
  add_common(party, party_common);

  // server
  auto* server = app.add_subcommand("server", "run the function-party over TCP");
  std::string server_listen, server_report, server_model;
  CommonOpts server_common;
  HyperOpts server_hyper;
  double server_test_fraction = 0.2;
  unsigned server_threads = std::thread::hardware_concurrency();
  server->add_option("--listen", server_listen, "listen endpoint host:port")->required();
  add_common(server, server_common);
  add_hyper(server, server_hyper);
  server->add_option("--test-fraction", server_test_fraction, "held-out fraction per party");
  server->add_option("--threads", server_threads, "CV worker threads");
  server->add_option("--report", server_report, "write a one-row CSV report");
  server->add_option("--model-out", server_model, "persist the trained models (.rekm)");

  // predict
  auto* predict = app.add_subcommand("predict", "predict a dataset with a persisted model");
  std::string predict_model, predict_data;
  predict->add_option("model", predict_model, "model file (.rekm)")->required();
  predict->add_option("data", predict_data, "test dataset (.rekd)")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "timing and accuracy benchmark");
  std::vector<size_t> bench_sizes{1000, 2000, 5000};
  BenchConfig bench_cfg;
  HyperOpts bench_hyper;
  std::string bench_report;
  bench->add_option("--sizes", bench_sizes, "total sample counts")->delimiter(',');
  bench->add_option("--reps", bench_cfg.repetitions, "measured repetitions");
  bench->add_option("--seed", bench_cfg.seed, "benchmark seed");
  bench->add_option("--frac-bits", bench_cfg.frac_bits, "fixed-point fractional bits");
  bench->add_option("--noise-std", bench_cfg.noise_std, "landmark noise std");
  bench->add_option("--threads", bench_cfg.threads, "CV worker threads");
  bench->add_option("--assemble-threads", bench_cfg.assemble_threads,
                    "parallel gram assembly workers (throughput exploration)");
  add_hyper(bench, bench_hyper);
  bench->add_option("--report", bench_report, "write CSV report");

  // audit
  auto* audit = app.add_subcommand("audit", "privacy and equivalence checks");
  audit->require_subcommand(1);
  auto* uni = audit->add_subcommand("uniformity", "chi-square uniformity of share coordinates");
  size_t uni_trials = 10000;
  uint64_t uni_seed = 7;
  bool uni_zero = false;
  uni->add_option("--trials", uni_trials, "maskings of the fixed input");
  uni->add_option("--seed", uni_seed, "seed");
  uni->add_flag("--zero-randomness", uni_zero, "audit hook: degenerate all-zero masks");
  auto* equiv = audit->add_subcommand("equivalence", "private vs plaintext gram equality");
  size_t equiv_n = 200;
  uint64_t equiv_seed = 7;
  uint32_t equiv_frac = FixedPointCodec::kDefaultFracBits;
  equiv->add_option("--n", equiv_n, "total samples");
  equiv->add_option("--seed", equiv_seed, "seed");
  equiv->add_option("--frac-bits", equiv_frac, "fixed-point fractional bits");
  auto* sim = audit->add_subcommand("simulator", "KS real-vs-simulated encoding views");
  size_t sim_draws = 100000, sim_pairs = 25;
  uint64_t sim_seed = 7;
  sim->add_option("--draws", sim_draws, "draws per input pair");
  sim->add_option("--pairs", sim_pairs, "fixed input pairs");
  sim->add_option("--seed", sim_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (gen->parsed()) return cmd_gen(gen_n, gen_seed, gen_noise, gen_out, gen_csv);
  if (local->parsed()) {
    return cmd_run_local(local_alice, local_bob, local_common, local_hyper, local_test_fraction,
                         local_threads, local_report, local_model, local_plain);
  }
  if (party->parsed()) {
    return cmd_party(party_role, party_data, party_server, party_peer, party_listen,
                     party_common);
  }
  if (server->parsed()) {
    return cmd_server(server_listen, server_common, server_hyper, server_test_fraction,
                      server_threads, server_report, server_model);
  }
  if (predict->parsed()) return cmd_predict(predict_model, predict_data);
  if (bench->parsed()) {
    bench_cfg.use_cv = bench_hyper.use_cv;
    bench_cfg.hp = bench_hyper.hp();
    return cmd_bench(bench_sizes, bench_cfg, bench_report);
  }
  if (uni->parsed()) return cmd_audit_uniformity(uni_trials, uni_seed, uni_zero);
  if (equiv->parsed()) return cmd_audit_equivalence(equiv_n, equiv_seed, equiv_frac);
  if (sim->parsed()) return cmd_audit_simulator(sim_draws, sim_pairs, sim_seed);
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const WireError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const RoleConflict& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
