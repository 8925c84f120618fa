#pragma once

#include <optional>

#include "rek/channel.hpp"
#include "rek/protocol.hpp"
#include "rek/wire.hpp"

namespace rek {

// Shared per-session configuration. All roles must agree on seed (or session
// id) and frac_bits out of band; the CLI passes the same flags to each role.
struct SessionConfig {
  uint64_t seed = 1;
  uint32_t frac_bits = FixedPointCodec::kDefaultFracBits;
  bool zero_masks = false;   // audit-only hook: all-zero DotRandomness
  bool os_entropy = false;   // deployment mode: draw shuffles and masks from
                             // OS entropy instead of the shared seed
  std::optional<SessionId> session;

  SessionId session_id() const { return session ? *session : session_id_from_seed(seed); }
  uint64_t shuffle_seed(Role r) const {
    if (os_entropy) return SystemSource().next_u64();
    return derive_seed(seed, r == Role::left ? 0xA11ull : 0xB0Bull);
  }
  uint64_t mask_seed() const {
    return os_entropy ? SystemSource().next_u64() : derive_seed(seed, 0x3A5Cull);
  }
};

struct PartyStats {
  double encode_seconds = 0.0;  // shuffle + quantize + share construction
  ByteCounters sent;
};

struct ServerResult {
  GramMatrix gram;
  LabelVector labels;  // pooled, alice block first
  size_t n_f = 0;
  ByteCounters received;
  double assemble_seconds = 0.0;

  // Total protocol bytes moved in the session: the received share words plus
  // the Alice-to-Bob mask vectors, whose size the protocol fixes at 2*n_f
  // words. Equals the party-side measured sum.
  uint64_t session_protocol_bytes() const { return received.protocol_bytes + 16ull * n_f; }
};

// Input-party state machines. Both shuffle their own data first; nothing
// derived from the permutation other than column order ever leaves the party.
PartyStats run_alice(Channel& to_bob, Channel& to_server, const RealDataset& data,
                     const SessionConfig& cfg);
PartyStats run_bob(Channel& from_alice, Channel& to_server, const RealDataset& data,
                   const SessionConfig& cfg);

// Function-party: accepts one upload per channel (concurrently), validates
// session and roles, assembles the gram matrix. Sends only ACK/ERROR frames.
ServerResult run_server(Channel& party_a, Channel& party_b, const SessionConfig& cfg,
                        unsigned assemble_threads = 1);

struct LocalSessionResult {
  ServerResult server;
  PartyStats alice;
  PartyStats bob;
};

// Runs all three roles over in-process channels, the two encoding parties on
// their own threads.
LocalSessionResult run_session_local(const RealDataset& alice_data, const RealDataset& bob_data,
                                     const SessionConfig& cfg, unsigned assemble_threads = 1);

// Same flow with the party-side datasets shuffled identically, but computed
// entirely in the clear. Used for equivalence checks.
GramMatrix reference_gram(const RealDataset& alice_data, const RealDataset& bob_data,
                          const SessionConfig& cfg);

}  // namespace rek
