#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <thread>

#include "rek/eyegen.hpp"
#include "rek/model_io.hpp"

using namespace rek;

namespace {

std::string cli_path() {
  const char* env = std::getenv("REK_CLI_BIN");
  REQUIRE_MESSAGE(env != nullptr, "REK_CLI_BIN must point at the rek binary");
  return env;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

// Poll a background daemon's output file until the marker shows up.
bool wait_for_output(const std::string& path, const std::string& marker,
                     double timeout_secs = 20.0) {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_secs);
  while (std::chrono::steady_clock::now() < deadline) {
    if (slurp(path).find(marker) != std::string::npos) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  return false;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) res.output += buf.data();
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string grab_line(const std::string& output, const std::string& prefix) {
  size_t pos = output.find(prefix);
  if (pos == std::string::npos) return {};
  const size_t end = output.find('\n', pos);
  return output.substr(pos, end - pos);
}

// Value part of a "label:   value" line, whitespace-trimmed.
std::string grab_value(const std::string& output, const std::string& prefix) {
  std::string line = grab_line(output, prefix);
  if (line.empty()) return {};
  std::string v = line.substr(prefix.size());
  const size_t b = v.find_first_not_of(" \t");
  const size_t e = v.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
}

}  // namespace

TEST_CASE("gen writes deterministic datasets and prints a checksum") {
  const RunResult a = run("gen --n 50 --seed 7 --out cli_a.rekd");
  CHECK(a.exit_code == 0);
  CHECK(a.output.find("wrote 50 samples (36 features)") != std::string::npos);
  const RunResult b = run("gen --n 50 --seed 7 --out cli_b.rekd");
  CHECK(b.exit_code == 0);
  CHECK(grab_line(a.output, "checksum:") == grab_line(b.output, "checksum:"));
  CHECK(file_checksum("cli_a.rekd") == file_checksum("cli_b.rekd"));

  const RunResult c = run("gen --n 1 --seed 8 --out cli_c.rekd");
  CHECK(c.exit_code == 0);
  CHECK(read_rekd("cli_c.rekd").n == 1);
  std::remove("cli_c.rekd");
}

TEST_CASE("missing dataset path exits with the config code") {
  const RunResult r = run("run-local --alice does_not_exist.rekd --bob cli_a.rekd");
  CHECK(r.exit_code == 2);
  const RunResult r2 = run("run-local --alice cli_a.rekd");
  CHECK(r2.exit_code == 2);
  const RunResult r3 = run("definitely-not-a-subcommand");
  CHECK(r3.exit_code == 2);
}

TEST_CASE("run-local trains, reports, persists, and predict round-trips") {
  REQUIRE(run("gen --n 120 --seed 21 --out cli_alice.rekd").exit_code == 0);
  REQUIRE(run("gen --n 120 --seed 22 --out cli_bob.rekd").exit_code == 0);

  const RunResult r = run(
      "run-local --alice cli_alice.rekd --bob cli_bob.rekd --seed 5 --gamma 2 --C 1 "
      "--epsilon 0.01 --insecure-plaintext --report cli_report.csv --model-out cli_model.rekm");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("gram checksum:") != std::string::npos);
  CHECK(r.output.find("mae:") != std::string::npos);

  // mae (plaintext) must equal the private mae exactly.
  const std::string mae = grab_value(r.output, "mae:");
  const std::string mae_plain = grab_value(r.output, "mae (plaintext):");
  REQUIRE(!mae.empty());
  REQUIRE(!mae_plain.empty());
  CHECK(mae == mae_plain);

  std::ifstream report("cli_report.csv");
  std::string header, row;
  std::getline(report, header);
  std::getline(report, row);
  CHECK(header.find("protocol_bytes") != std::string::npos);
  CHECK(!row.empty());

  // Persisted model predicts the held-out file with a printed mae.
  REQUIRE(run("gen --n 40 --seed 23 --out cli_test.rekd").exit_code == 0);
  const RunResult p = run("predict cli_model.rekm cli_test.rekd");
  CHECK(p.exit_code == 0);
  CHECK(p.output.find("mae:") != std::string::npos);

  std::remove("cli_report.csv");
  std::remove("cli_test.rekd");
}

TEST_CASE("run-local and the tcp daemons agree bit for bit") {
  REQUIRE(run("gen --n 30 --seed 31 --out cli_ta.rekd").exit_code == 0);
  REQUIRE(run("gen --n 30 --seed 32 --out cli_tb.rekd").exit_code == 0);

  const RunResult local = run(
      "run-local --alice cli_ta.rekd --bob cli_tb.rekd --seed 13 --gamma 1 --C 1 "
      "--epsilon 0.05 --model-out cli_local.rekm");
  REQUIRE(local.exit_code == 0);
  const std::string local_checksum = grab_line(local.output, "gram checksum:");
  const std::string local_bytes = grab_line(local.output, "protocol bytes:");

  // Three daemons on loopback. Server and bob run in the background.
  const std::string server_cmd =
      cli_path() +
      " server --listen 127.0.0.1:47311 --seed 13 --gamma 1 --C 1 --epsilon 0.05 "
      "--model-out cli_tcp.rekm > cli_server.out 2>&1 &";
  REQUIRE(std::system(server_cmd.c_str()) == 0);
  const std::string bob_cmd =
      cli_path() +
      " party --role bob --data cli_tb.rekd --server 127.0.0.1:47311 "
      "--listen 127.0.0.1:47312 --seed 13 > cli_bob.out 2>&1 &";
  REQUIRE(std::system(bob_cmd.c_str()) == 0);

  const RunResult alice = run(
      "party --role alice --data cli_ta.rekd --server 127.0.0.1:47311 "
      "--peer 127.0.0.1:47312 --seed 13");
  CHECK(alice.exit_code == 0);
  REQUIRE(wait_for_output("cli_server.out", "model:"));

  const std::string server_text = slurp("cli_server.out");
  CHECK(grab_line(server_text, "gram checksum:") == local_checksum);
  CHECK(grab_line(server_text, "protocol bytes:") == local_bytes);

  // Identical models modulo the feature payload (the tcp server has none).
  const ModelFile m_local = read_rekm("cli_local.rekm");
  const ModelFile m_tcp = read_rekm("cli_tcp.rekm");
  CHECK(models_equivalent(m_local, m_tcp));
  CHECK(m_local.pitch.has_features);
  CHECK(!m_tcp.pitch.has_features);

  std::remove("cli_ta.rekd");
  std::remove("cli_tb.rekd");
  std::remove("cli_local.rekm");
  std::remove("cli_tcp.rekm");
  std::remove("cli_server.out");
  std::remove("cli_bob.out");
}

TEST_CASE("wrong session id fails the protocol with exit 3") {
  REQUIRE(run("gen --n 10 --seed 41 --out cli_sa.rekd").exit_code == 0);
  REQUIRE(run("gen --n 10 --seed 42 --out cli_sb.rekd").exit_code == 0);

  const std::string server_cmd =
      cli_path() +
      " server --listen 127.0.0.1:47321 --seed 99 > cli_server2.out 2>&1 &";
  REQUIRE(std::system(server_cmd.c_str()) == 0);
  const std::string bob_cmd =
      cli_path() +
      " party --role bob --data cli_sb.rekd --server 127.0.0.1:47321 "
      "--listen 127.0.0.1:47322 --seed 77 > cli_bob2.out 2>&1 &";
  REQUIRE(std::system(bob_cmd.c_str()) == 0);

  // Alice shares bob's seed, so both parties disagree with the server.
  setenv("REK_TIMEOUT_SECS", "3", 1);
  const RunResult alice = run(
      "party --role alice --data cli_sa.rekd --server 127.0.0.1:47321 "
      "--peer 127.0.0.1:47322 --seed 77");
  unsetenv("REK_TIMEOUT_SECS");
  CHECK(alice.exit_code == 3);
  wait_for_output("cli_server2.out", "error", 5.0);

  std::remove("cli_sa.rekd");
  std::remove("cli_sb.rekd");
  std::remove("cli_server2.out");
  std::remove("cli_bob2.out");
}

TEST_CASE("session pinned without a seed switches to os-entropy randomness") {
  // Two runs with the same explicit session id but no --seed must produce
  // different masked uploads (fresh masks) yet identical gram matrices.
  const RunResult a = run(
      "run-local --alice cli_alice.rekd --bob cli_bob.rekd "
      "--session 00112233445566778899aabbccddeeff --gamma 1 --C 1 --epsilon 0.05");
  const RunResult b = run(
      "run-local --alice cli_alice.rekd --bob cli_bob.rekd "
      "--session 00112233445566778899aabbccddeeff --gamma 1 --C 1 --epsilon 0.05");
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  // Shuffles differ run to run, so the gram checksum differs too; byte
  // counts stay fixed by the dimensions.
  CHECK(grab_value(a.output, "protocol bytes:") == grab_value(b.output, "protocol bytes:"));
  CHECK(grab_value(a.output, "gram checksum:") != grab_value(b.output, "gram checksum:"));
}

TEST_CASE("audit subcommands run end to end") {
  const RunResult uni = run("audit uniformity --trials 10000 --seed 3");
  CHECK(uni.exit_code == 0);
  CHECK(uni.output.find("verdict:         ok") != std::string::npos);

  const RunResult zero = run("audit uniformity --trials 10000 --seed 3 --zero-randomness");
  CHECK(zero.exit_code == 0);  // hook mode: flagging the leak is the success
  CHECK(zero.output.find("LEAK FLAGGED") != std::string::npos);

  const RunResult equiv = run("audit equivalence --n 100 --seed 5");
  CHECK(equiv.exit_code == 0);
  CHECK(equiv.output.find("= 0") != std::string::npos);

  const RunResult sim = run("audit simulator --draws 20000 --pairs 5 --seed 6");
  CHECK(sim.exit_code == 0);

  std::remove("cli_alice.rekd");
  std::remove("cli_bob.rekd");
  std::remove("cli_model.rekm");
  std::remove("cli_a.rekd");
  std::remove("cli_b.rekd");
}
