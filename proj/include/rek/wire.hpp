#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rek/encoding.hpp"
#include "rek/errors.hpp"
#include "rek/protocol.hpp"

namespace rek {

using SessionId = std::array<uint8_t, 16>;

SessionId session_id_from_seed(uint64_t seed);
std::string session_id_hex(const SessionId& id);
SessionId parse_session_id(const std::string& hex);

enum class MessageType : uint8_t {
  randomness = 0x01,    // Alice -> Bob: n_f, r1, r2, r3
  share_upload = 0x02,  // party -> Server: role, n_f, n, shares, gram, labels
  ack = 0x03,
  error = 0x04,
};

// Wire frame: magic "REK1", msg_type u8, session_id 16 bytes, payload_len
// u64 little-endian, payload. Everything little-endian; ring elements as raw
// 8-byte words, reals as IEEE-754 binary64.
struct Frame {
  MessageType type = MessageType::ack;
  SessionId session{};
  std::vector<uint8_t> payload;
};

constexpr std::array<uint8_t, 4> kFrameMagic = {0x52, 0x45, 0x4B, 0x31};  // "REK1"
constexpr size_t kFrameHeaderBytes = 4 + 1 + 16 + 8;
constexpr uint64_t kDefaultPayloadCap = 1ull << 32;

std::vector<uint8_t> serialize_frame(const Frame& frame, uint64_t payload_cap = kDefaultPayloadCap);
Frame deserialize_frame(const std::vector<uint8_t>& bytes,
                        uint64_t payload_cap = kDefaultPayloadCap);

struct RandomnessMsg {
  DotRandomness r;
};

struct ShareUploadMsg {
  ShareBundle bundle;  // local_gram travels as the packed lower triangle
};

struct ErrorMsg {
  uint32_t code = 0;
  std::string message;
};

std::vector<uint8_t> encode_randomness(const RandomnessMsg& m);
RandomnessMsg decode_randomness(const std::vector<uint8_t>& payload);

std::vector<uint8_t> encode_share_upload(const ShareUploadMsg& m);
ShareUploadMsg decode_share_upload(const std::vector<uint8_t>& payload);

std::vector<uint8_t> encode_error(const ErrorMsg& m);
ErrorMsg decode_error(const std::vector<uint8_t>& payload);

// Byte accounting. protocol_bytes counts exactly the share and mask words of
// the dot-product computation (C1, C2, C3, C4, r1, r2); auxiliary_bytes
// counts local gram blocks and labels; everything else (frame headers,
// dimension fields, role bytes, r3, ACK/ERROR frames) is framing overhead.
struct ByteCounters {
  uint64_t protocol_bytes = 0;
  uint64_t auxiliary_bytes = 0;
  uint64_t framing_bytes = 0;

  uint64_t total() const { return protocol_bytes + auxiliary_bytes + framing_bytes; }
  ByteCounters& operator+=(const ByteCounters& o) {
    protocol_bytes += o.protocol_bytes;
    auxiliary_bytes += o.auxiliary_bytes;
    framing_bytes += o.framing_bytes;
    return *this;
  }
};

// Split one outgoing frame's wire bytes into the three counters.
ByteCounters count_frame_bytes(const Frame& frame);

}  // namespace rek
