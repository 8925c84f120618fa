#include "rek/session.hpp"

#include <chrono>
#include <thread>

namespace rek {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Frame make_frame(MessageType type, const SessionId& id, std::vector<uint8_t> payload) {
  Frame f;
  f.type = type;
  f.session = id;
  f.payload = std::move(payload);
  return f;
}

// Raise an ERROR frame received from a peer as a PeerError.
[[noreturn]] void raise_peer_error(const Frame& f) {
  const ErrorMsg e = decode_error(f.payload);
  throw PeerError(e.code, "peer error " + std::to_string(e.code) + ": " + e.message);
}

void expect_ack(Channel& ch) {
  const Frame f = ch.recv();
  if (f.type == MessageType::error) raise_peer_error(f);
  if (f.type != MessageType::ack) throw UnknownType("expected ACK");
}

}  // namespace

PartyStats run_alice(Channel& to_bob, Channel& to_server, const RealDataset& data,
                     const SessionConfig& cfg) {
  if (data.n == 0) throw DimensionMismatch("alice: empty dataset rejected at session setup");
  const SessionId sid = cfg.session_id();
  PartyStats stats;

  const auto t0 = Clock::now();
  RealDataset shuffled = data;
  shuffle_dataset(shuffled, cfg.shuffle_seed(Role::left));

  DotRandomness r;
  if (cfg.zero_masks) {
    ZeroSource zero;
    r = alice_setup(data.n_f, zero);
  } else {
    r = alice_setup(data.n_f, cfg.mask_seed());
  }

  // Randomness goes to Bob only; the server never sees it.
  const Frame rnd = make_frame(MessageType::randomness, sid, encode_randomness({r}));
  stats.sent += count_frame_bytes(rnd);
  to_bob.send(rnd);

  const FixedPointCodec codec(cfg.frac_bits);
  ShareUploadMsg upload{build_share_bundle(Role::left, shuffled, r, codec)};
  const Frame up = make_frame(MessageType::share_upload, sid, encode_share_upload(upload));
  stats.encode_seconds = seconds_since(t0);

  stats.sent += count_frame_bytes(up);
  to_server.send(up);
  expect_ack(to_server);
  expect_ack(to_bob);
  return stats;
}

PartyStats run_bob(Channel& from_alice, Channel& to_server, const RealDataset& data,
                   const SessionConfig& cfg) {
  if (data.n == 0) throw DimensionMismatch("bob: empty dataset rejected at session setup");
  const SessionId sid = cfg.session_id();
  PartyStats stats;

  const Frame rnd = from_alice.recv();
  if (rnd.type == MessageType::error) raise_peer_error(rnd);
  if (rnd.type != MessageType::randomness) {
    throw UnknownType("bob: expected RANDOMNESS, got type " +
                      std::to_string(static_cast<int>(rnd.type)));
  }
  if (rnd.session != sid) {
    from_alice.send(make_frame(MessageType::error, sid,
                               encode_error({3, "session id mismatch at bob"})));
    throw PeerError(3, "bob: session id mismatch");
  }
  const DotRandomness r = decode_randomness(rnd.payload).r;

  const auto t0 = Clock::now();
  RealDataset shuffled = data;
  shuffle_dataset(shuffled, cfg.shuffle_seed(Role::right));

  const FixedPointCodec codec(cfg.frac_bits);
  ShareUploadMsg upload{build_share_bundle(Role::right, shuffled, r, codec)};
  const Frame up = make_frame(MessageType::share_upload, sid, encode_share_upload(upload));
  stats.encode_seconds = seconds_since(t0);

  stats.sent += count_frame_bytes(up);
  to_server.send(up);

  from_alice.send(make_frame(MessageType::ack, sid, {}));
  expect_ack(to_server);
  return stats;
}

ServerResult run_server(Channel& party_a, Channel& party_b, const SessionConfig& cfg,
                        unsigned assemble_threads) {
  const SessionId sid = cfg.session_id();

  struct Slot {
    Frame frame;
    std::exception_ptr error;
  };
  Slot slots[2];
  {
    // Both uploads can arrive in any order; read them concurrently.
    std::thread t_a([&] {
      try {
        slots[0].frame = party_a.recv();
      } catch (...) {
        slots[0].error = std::current_exception();
      }
    });
    std::thread t_b([&] {
      try {
        slots[1].frame = party_b.recv();
      } catch (...) {
        slots[1].error = std::current_exception();
      }
    });
    t_a.join();
    t_b.join();
  }
  if (slots[0].error) std::rethrow_exception(slots[0].error);
  if (slots[1].error) std::rethrow_exception(slots[1].error);

  ServerResult res;
  ShareUploadMsg uploads[2];
  Channel* channels[2] = {&party_a, &party_b};
  for (int i = 0; i < 2; ++i) {
    const Frame& f = slots[i].frame;
    if (f.type == MessageType::error) raise_peer_error(f);
    if (f.type != MessageType::share_upload) {
      channels[i]->send(make_frame(MessageType::error, sid,
                                   encode_error({3, "expected SHARE_UPLOAD"})));
      throw UnknownType("server: expected SHARE_UPLOAD");
    }
    if (f.session != sid) {
      channels[i]->send(make_frame(MessageType::error, sid,
                                   encode_error({3, "session id mismatch at server"})));
      throw PeerError(3, "server: session id mismatch from party " + std::to_string(i));
    }
    res.received += count_frame_bytes(f);
    uploads[i] = decode_share_upload(f.payload);
  }
  if (uploads[0].bundle.role == uploads[1].bundle.role) {
    const auto err = make_frame(MessageType::error, sid,
                                encode_error({3, "duplicate role upload"}));
    party_a.send(err);
    party_b.send(err);
    throw RoleConflict("server: two uploads with role " +
                       std::string(role_name(uploads[0].bundle.role)));
  }

  const ShareBundle& left =
      uploads[0].bundle.role == Role::left ? uploads[0].bundle : uploads[1].bundle;
  const ShareBundle& right =
      uploads[0].bundle.role == Role::left ? uploads[1].bundle : uploads[0].bundle;

  const auto t0 = Clock::now();
  res.gram = assemble_gram(left, right, cfg.frac_bits, assemble_threads);
  res.assemble_seconds = seconds_since(t0);
  res.labels = pool_labels(left.labels, right.labels);
  res.n_f = left.n_f;

  party_a.send(make_frame(MessageType::ack, sid, {}));
  party_b.send(make_frame(MessageType::ack, sid, {}));
  return res;
}

LocalSessionResult run_session_local(const RealDataset& alice_data, const RealDataset& bob_data,
                                     const SessionConfig& cfg, unsigned assemble_threads) {
  auto [alice_to_bob, bob_from_alice] = InProcessChannel::make_pair();
  auto [alice_to_server, server_from_alice] = InProcessChannel::make_pair();
  auto [bob_to_server, server_from_bob] = InProcessChannel::make_pair();

  LocalSessionResult out;
  std::exception_ptr alice_err, bob_err;

  std::thread alice_thread([&] {
    try {
      out.alice = run_alice(*alice_to_bob, *alice_to_server, alice_data, cfg);
    } catch (...) {
      alice_err = std::current_exception();
    }
  });
  std::thread bob_thread([&] {
    try {
      out.bob = run_bob(*bob_from_alice, *bob_to_server, bob_data, cfg);
    } catch (...) {
      bob_err = std::current_exception();
    }
  });

  std::exception_ptr server_err;
  try {
    out.server = run_server(*server_from_alice, *server_from_bob, cfg, assemble_threads);
  } catch (...) {
    server_err = std::current_exception();
  }
  alice_thread.join();
  bob_thread.join();
  if (alice_err) std::rethrow_exception(alice_err);
  if (bob_err) std::rethrow_exception(bob_err);
  if (server_err) std::rethrow_exception(server_err);
  return out;
}

GramMatrix reference_gram(const RealDataset& alice_data, const RealDataset& bob_data,
                          const SessionConfig& cfg) {
  RealDataset a = alice_data, b = bob_data;
  shuffle_dataset(a, cfg.shuffle_seed(Role::left));
  shuffle_dataset(b, cfg.shuffle_seed(Role::right));
  return plaintext_gram(a, b, FixedPointCodec(cfg.frac_bits));
}

}  // namespace rek
