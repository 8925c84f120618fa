#include "rek/audit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rek/eyegen.hpp"

namespace rek {

ViewSamples collect_views(const RealDataset& alice, const RealDataset& bob, size_t trials,
                          uint64_t seed, uint32_t frac_bits, bool zero_masks) {
  const FixedPointCodec codec(frac_bits);
  const size_t n_coords = alice.n_f * alice.n + alice.n + bob.n_f * bob.n + bob.n;

  ViewSamples views;
  views.coordinates = n_coords;
  views.per_coordinate.assign(n_coords, {});
  for (auto& v : views.per_coordinate) v.reserve(trials);

  for (size_t t = 0; t < trials; ++t) {
    DotRandomness r;
    if (zero_masks) {
      ZeroSource zero;
      r = DotRandomness::sample(alice.n_f, zero);
    } else {
      Mt19937Source src(derive_seed(seed, t));
      r = DotRandomness::sample(alice.n_f, src);
    }
    const ShareBundle a = build_share_bundle(Role::left, alice, r, codec);
    const ShareBundle b = build_share_bundle(Role::right, bob, r, codec);
    size_t c = 0;
    for (const auto& e : a.masked_matrix.data) views.per_coordinate[c++].push_back(e.v);
    for (const auto& e : a.masked_scalars) views.per_coordinate[c++].push_back(e.v);
    for (const auto& e : b.masked_matrix.data) views.per_coordinate[c++].push_back(e.v);
    for (const auto& e : b.masked_scalars) views.per_coordinate[c++].push_back(e.v);
  }
  return views;
}

std::vector<uint64_t> share_words_from_transcript(const Transcript& transcript) {
  std::vector<uint64_t> words;
  for (const auto& entry : transcript) {
    if (entry.frame.type != MessageType::share_upload) continue;
    const ShareUploadMsg m = decode_share_upload(entry.frame.payload);
    for (const auto& e : m.bundle.masked_matrix.data) words.push_back(e.v);
    for (const auto& e : m.bundle.masked_scalars) words.push_back(e.v);
  }
  return words;
}

UniformityReport check_view_uniformity(const ViewSamples& views, size_t trials, double alpha) {
  if (trials < 10000) {
    throw InsufficientTrials("check_view_uniformity: need >= 10^4 trials, got " +
                             std::to_string(trials));
  }
  UniformityReport report;
  report.alpha = alpha;
  report.coordinates = views.coordinates;
  for (const auto& samples : views.per_coordinate) {
    if (samples.size() < trials) {
      throw InsufficientTrials("check_view_uniformity: coordinate with fewer samples than trials");
    }
    const double p = stats::byte_uniformity_p(samples);
    report.min_p = std::min(report.min_p, p);
    if (p >= alpha) ++report.passed;
  }
  return report;
}

SimulatorReport check_simulator_indistinguishability(size_t draws, size_t input_pairs,
                                                     uint64_t seed, double alpha) {
  SimulatorReport report;
  Mt19937Source input_src(derive_seed(seed, 0xF00D));
  for (size_t pair = 0; pair < input_pairs; ++pair) {
    const RingElement x1 = sample_uniform(input_src);
    const RingElement x2 = sample_uniform(input_src);
    const RingElement y = x1 * x2;

    Mt19937Source real_src(derive_seed(seed, 2 * pair + 1));
    Mt19937Source sim_src(derive_seed(seed, 2 * pair + 2));

    std::vector<std::vector<double>> real(4), sim(4);
    for (auto& v : real) v.reserve(draws);
    for (auto& v : sim) v.reserve(draws);
    auto to_unit = [](RingElement e) { return std::ldexp(static_cast<double>(e.v), -64); };
    for (size_t d = 0; d < draws; ++d) {
      const MulEncoding enc = encode_mul(x1, x2, MulRandomness::sample(real_src));
      const MulEncoding smc = simulate_mul(y, sample_uniform(sim_src), sample_uniform(sim_src),
                                           sample_uniform(sim_src));
      real[0].push_back(to_unit(enc.c1));
      real[1].push_back(to_unit(enc.c2));
      real[2].push_back(to_unit(enc.c3));
      real[3].push_back(to_unit(enc.c4));
      sim[0].push_back(to_unit(smc.c1));
      sim[1].push_back(to_unit(smc.c2));
      sim[2].push_back(to_unit(smc.c3));
      sim[3].push_back(to_unit(smc.c4));
    }
    for (int comp = 0; comp < 4; ++comp) {
      const auto ks = stats::ks_two_sample(real[comp], sim[comp]);
      report.min_p = std::min(report.min_p, ks.p_value);
      ++report.tests;
      if (ks.p_value >= alpha) ++report.passed;
    }

    // Pairwise-joint distributions, checked with the 2D KS on a thinned
    // subsample (the quadrant scan is quadratic). First few input pairs only.
    if (pair < 4) {
      const size_t sub = std::min<size_t>(3000, draws);
      const size_t stride = draws / sub;
      for (int c1 = 0; c1 < 4; ++c1) {
        for (int c2 = c1 + 1; c2 < 4; ++c2) {
          std::vector<std::pair<double, double>> ra, sa;
          ra.reserve(sub);
          sa.reserve(sub);
          for (size_t d = 0; d < draws; d += stride) {
            ra.emplace_back(real[c1][d], real[c2][d]);
            sa.emplace_back(sim[c1][d], sim[c2][d]);
          }
          const auto ks = stats::ks2d_two_sample(ra, sa);
          report.min_p = std::min(report.min_p, ks.p_value);
          ++report.tests;
          if (ks.p_value >= alpha) ++report.passed;
        }
      }
    }
  }
  return report;
}

double check_gram_equivalence(const RealDataset& alice, const RealDataset& bob,
                              const SessionConfig& cfg) {
  const LocalSessionResult session = run_session_local(alice, bob, cfg);
  const GramMatrix plain = reference_gram(alice, bob, cfg);
  return session.server.gram.k.max_abs_diff(plain.k);
}

namespace {

struct Running {
  std::vector<double> samples;
  void add(double v) { samples.push_back(v); }
  double mean() const {
    double s = 0.0;
    for (double v : samples) s += v;
    return samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
  }
  double stddev() const {
    if (samples.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double v : samples) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(samples.size() - 1));
  }
};

}  // namespace

std::string BenchReport::csv_header() {
  return "size,n_a,n_b,n_f,frac_bits,repetitions,"
         "alice_encode_mean_s,alice_encode_std_s,bob_encode_mean_s,bob_encode_std_s,"
         "server_assemble_mean_s,server_assemble_std_s,server_train_mean_s,server_train_std_s,"
         "server_predict_total_mean_s,server_predict_total_std_s,per_sample_predict_ms,"
         "protocol_bytes,auxiliary_bytes,framing_bytes,mae_private_deg,mae_plaintext_deg,"
         "hyperparams";
}

std::string BenchReport::csv_row() const {
  std::ostringstream os;
  os.precision(9);
  os << size << ',' << n_a << ',' << n_b << ',' << n_f << ',' << frac_bits << ','
     << repetitions << ',' << alice_encode_mean << ',' << alice_encode_std << ','
     << bob_encode_mean << ',' << bob_encode_std << ',' << server_assemble_mean << ','
     << server_assemble_std << ',' << server_train_mean << ',' << server_train_std << ','
     << server_predict_total_mean << ',' << server_predict_total_std << ','
     << per_sample_predict_ms << ',' << protocol_bytes << ',' << auxiliary_bytes << ','
     << framing_bytes << ',' << mae_private << ',' << mae_plaintext << ",\"" << hyperparams
     << "\"";
  return os.str();
}

std::vector<BenchReport> run_benchmark(const std::vector<size_t>& sizes, const BenchConfig& cfg) {
  if (sizes.empty()) throw InvalidConfig("run_benchmark: sizes must be nonempty");

  std::vector<BenchReport> reports;
  for (size_t size : sizes) {
    if (size < 10) throw InvalidConfig("run_benchmark: size too small");
    EyeModelParams eye;
    eye.seed = derive_seed(cfg.seed, size);
    eye.landmark_noise_std = cfg.noise_std;
    const RealDataset all = generate_dataset(size, eye);

    // Equal split between the input-parties.
    RealDataset alice, bob;
    alice.n_f = bob.n_f = all.n_f;
    alice.n = size / 2;
    bob.n = size - alice.n;
    alice.features.assign(all.features.begin(),
                          all.features.begin() + static_cast<long>(alice.n * all.n_f));
    bob.features.assign(all.features.begin() + static_cast<long>(alice.n * all.n_f),
                        all.features.end());
    alice.labels.targets.assign(all.labels.targets.begin(),
                                all.labels.targets.begin() + static_cast<long>(alice.n));
    bob.labels.targets.assign(all.labels.targets.begin() + static_cast<long>(alice.n),
                              all.labels.targets.end());

    SessionConfig session_cfg;
    session_cfg.seed = derive_seed(cfg.seed, size + 1);
    session_cfg.frac_bits = cfg.frac_bits;

    FitConfig fit_cfg;
    fit_cfg.test_fraction = cfg.test_fraction;
    fit_cfg.use_cv = false;
    fit_cfg.hp_pitch = cfg.hp;
    fit_cfg.hp_yaw = cfg.hp;
    fit_cfg.threads = cfg.threads;

    // Optional one-off CV to pick hyperparameters before the timed runs.
    if (cfg.use_cv) {
      const LocalSessionResult warm = run_session_local(alice, bob, session_cfg);
      FitConfig cv_cfg = fit_cfg;
      cv_cfg.use_cv = true;
      const FitResult cv_fit = fit_and_evaluate(warm.server.gram, warm.server.labels, cv_cfg);
      fit_cfg.hp_pitch = cv_fit.hp_pitch;
      fit_cfg.hp_yaw = cv_fit.hp_yaw;
    }

    BenchReport rep;
    rep.size = size;
    rep.n_a = alice.n;
    rep.n_b = bob.n;
    rep.n_f = all.n_f;
    rep.frac_bits = cfg.frac_bits;
    rep.repetitions = cfg.repetitions;
    rep.hyperparams = fit_cfg.hp_pitch.kernel.describe() + " C=" +
                      std::to_string(fit_cfg.hp_pitch.C) + " eps=" +
                      std::to_string(fit_cfg.hp_pitch.epsilon);

    Running alice_s, bob_s, assemble_s, train_s, predict_s;
    size_t test_count = 0;

    // Warm-up run excluded from the statistics.
    for (size_t rep_i = 0; rep_i < cfg.repetitions + 1; ++rep_i) {
      const LocalSessionResult session =
          run_session_local(alice, bob, session_cfg, cfg.assemble_threads);
      const FitResult fit = fit_and_evaluate(session.server.gram, session.server.labels, fit_cfg);
      if (rep_i == 0) {
        rep.protocol_bytes = session.alice.sent.protocol_bytes + session.bob.sent.protocol_bytes;
        rep.auxiliary_bytes =
            session.alice.sent.auxiliary_bytes + session.bob.sent.auxiliary_bytes;
        rep.framing_bytes = session.alice.sent.framing_bytes + session.bob.sent.framing_bytes;
        rep.mae_private = fit.mae_degrees;
        const GramMatrix plain = reference_gram(alice, bob, session_cfg);
        const FitResult plain_fit = fit_and_evaluate(plain, session.server.labels, fit_cfg);
        rep.mae_plaintext = plain_fit.mae_degrees;
        test_count = fit.split.test.size();
        continue;
      }
      alice_s.add(session.alice.encode_seconds);
      bob_s.add(session.bob.encode_seconds);
      assemble_s.add(session.server.assemble_seconds);
      train_s.add(fit.train_seconds + fit.cv_seconds);
      predict_s.add(fit.predict_seconds);
    }

    rep.alice_encode_mean = alice_s.mean();
    rep.alice_encode_std = alice_s.stddev();
    rep.bob_encode_mean = bob_s.mean();
    rep.bob_encode_std = bob_s.stddev();
    rep.server_assemble_mean = assemble_s.mean();
    rep.server_assemble_std = assemble_s.stddev();
    rep.server_train_mean = train_s.mean();
    rep.server_train_std = train_s.stddev();
    rep.server_predict_total_mean = predict_s.mean();
    rep.server_predict_total_std = predict_s.stddev();
    rep.per_sample_predict_ms =
        test_count == 0 ? 0.0
                        : rep.server_predict_total_mean * 1000.0 / static_cast<double>(test_count);
    reports.push_back(std::move(rep));
  }
  return reports;
}

void write_bench_csv(const std::string& path, const std::vector<BenchReport>& reports) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << BenchReport::csv_header() << '\n';
  for (const auto& r : reports) os << r.csv_row() << '\n';
  if (!os) throw IoError("write failed: " + path);
}

std::string bench_table(const std::vector<BenchReport>& reports) {
  std::ostringstream os;
  os << "size   n_a    n_b    alice(s)  bob(s)    assemble(s)  train(s)   predict(s)  "
        "ms/sample  proto_bytes   mae(deg)\n";
  for (const auto& r : reports) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-6zu %-6zu %-6zu %-9.4f %-9.4f %-12.4f %-10.4f %-11.4f %-10.4f %-13llu %.4f\n",
                  r.size, r.n_a, r.n_b, r.alice_encode_mean, r.bob_encode_mean,
                  r.server_assemble_mean, r.server_train_mean, r.server_predict_total_mean,
                  r.per_sample_predict_ms, static_cast<unsigned long long>(r.protocol_bytes),
                  r.mae_private);
    os << line;
  }
  return os.str();
}

}  // namespace rek
