#pragma once

#include <optional>
#include <string>

#include "rek/pipeline.hpp"
#include "rek/session.hpp"
#include "rek/stats.hpp"

namespace rek {

// Outcome of the share-coordinate uniformity check: one pooled-byte
// chi-square test per coordinate of C1, C2, C3, C4 across repeated maskings
// of a fixed input with fresh randomness.
struct UniformityReport {
  size_t coordinates = 0;
  size_t passed = 0;
  double min_p = 1.0;
  double alpha = 0.01;

  double pass_fraction() const {
    return coordinates == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(coordinates);
  }
  bool leak_flagged() const { return pass_fraction() < 0.95; }
};

// Word-level views of the four share components, one row per trial.
struct ViewSamples {
  size_t coordinates = 0;
  std::vector<std::vector<uint64_t>> per_coordinate;  // [coordinate][trial]
};

// Collect views by rebuilding the share bundles of both parties from fixed
// plaintext inputs under fresh randomness per trial (zero_masks swaps in the
// broken all-zero source for auditing the audit).
ViewSamples collect_views(const RealDataset& alice, const RealDataset& bob, size_t trials,
                          uint64_t seed, uint32_t frac_bits, bool zero_masks = false);

// Extract the same view words from a recorded transport transcript of
// SHARE_UPLOAD frames; used to tie the statistical check to real wire data.
std::vector<uint64_t> share_words_from_transcript(const Transcript& transcript);

UniformityReport check_view_uniformity(const ViewSamples& views, size_t trials,
                                       double alpha = 0.01);

// Per-component two-sample KS between real mul encodings over uniform
// randomness and simulator outputs over uniform seeds, across several fixed
// input pairs.
struct SimulatorReport {
  size_t tests = 0;
  size_t passed = 0;
  double min_p = 1.0;

  double pass_fraction() const {
    return tests == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(tests);
  }
};

SimulatorReport check_simulator_indistinguishability(size_t draws, size_t input_pairs,
                                                     uint64_t seed, double alpha = 0.01);

// Runs the full in-process protocol and the plaintext pipeline on
// identically quantized data; returns the max elementwise difference
// (expected: exactly zero).
double check_gram_equivalence(const RealDataset& alice, const RealDataset& bob,
                              const SessionConfig& cfg);

struct BenchReport {
  size_t size = 0;  // total samples
  size_t n_a = 0, n_b = 0, n_f = 0;
  uint32_t frac_bits = 20;
  size_t repetitions = 0;
  // Seconds; mean and standard deviation over the measured repetitions.
  double alice_encode_mean = 0.0, alice_encode_std = 0.0;
  double bob_encode_mean = 0.0, bob_encode_std = 0.0;
  double server_assemble_mean = 0.0, server_assemble_std = 0.0;
  double server_train_mean = 0.0, server_train_std = 0.0;
  double server_predict_total_mean = 0.0, server_predict_total_std = 0.0;
  double per_sample_predict_ms = 0.0;
  uint64_t protocol_bytes = 0;
  uint64_t auxiliary_bytes = 0;
  uint64_t framing_bytes = 0;
  double mae_private = 0.0;
  double mae_plaintext = 0.0;
  std::string hyperparams;

  static std::string csv_header();
  std::string csv_row() const;
};

struct BenchConfig {
  size_t repetitions = 10;
  uint64_t seed = 7;
  uint32_t frac_bits = FixedPointCodec::kDefaultFracBits;
  double test_fraction = 0.2;
  bool use_cv = false;
  SvrHyperparams hp;              // both angles when use_cv is false
  unsigned threads = 1;           // measured path stays single-threaded by default
  unsigned assemble_threads = 1;  // parallel assembly is opt-in and reported as configured
  double noise_std = 0.0;
};

// For each size: generate data, split it equally between the parties, hold
// out the test fraction, run the protocol, train, and measure. One warm-up
// run is excluded from the statistics.
std::vector<BenchReport> run_benchmark(const std::vector<size_t>& sizes, const BenchConfig& cfg);

void write_bench_csv(const std::string& path, const std::vector<BenchReport>& reports);
std::string bench_table(const std::vector<BenchReport>& reports);

}  // namespace rek
