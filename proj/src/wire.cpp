#include "rek/wire.hpp"

#include <cstring>

#include "rek/rng.hpp"

namespace rek {

SessionId session_id_from_seed(uint64_t seed) {
  SessionId id{};
  uint64_t s = seed ^ 0x5e55ull;
  const uint64_t a = splitmix64(s), b = splitmix64(s);
  std::memcpy(id.data(), &a, 8);
  std::memcpy(id.data() + 8, &b, 8);
  return id;
}

std::string session_id_hex(const SessionId& id) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(32);
  for (uint8_t b : id) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

SessionId parse_session_id(const std::string& hex) {
  if (hex.size() != 32) throw InvalidConfig("session id must be 32 hex chars");
  SessionId id{};
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw InvalidConfig("invalid hex char in session id");
  };
  for (size_t i = 0; i < 16; ++i) {
    id[i] = static_cast<uint8_t>((nib(hex[2 * i]) << 4) | nib(hex[2 * i + 1]));
  }
  return id;
}

namespace {

void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

struct Reader {
  const std::vector<uint8_t>& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) throw Truncated("payload shorter than declared content");
  }
  uint8_t u8() {
    need(1);
    return buf[pos++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos + static_cast<size_t>(i)]) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[pos + static_cast<size_t>(i)]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  void done() const {
    if (pos != buf.size()) throw LengthMismatch("payload longer than declared content");
  }
};

bool known_type(uint8_t t) {
  return t == static_cast<uint8_t>(MessageType::randomness) ||
         t == static_cast<uint8_t>(MessageType::share_upload) ||
         t == static_cast<uint8_t>(MessageType::ack) ||
         t == static_cast<uint8_t>(MessageType::error);
}

}  // namespace

std::vector<uint8_t> serialize_frame(const Frame& frame, uint64_t payload_cap) {
  if (frame.payload.size() > payload_cap) {
    throw LengthMismatch("payload exceeds cap of " + std::to_string(payload_cap) + " bytes");
  }
  std::vector<uint8_t> out;
  out.reserve(kFrameHeaderBytes + frame.payload.size());
  out.insert(out.end(), kFrameMagic.begin(), kFrameMagic.end());
  put_u8(out, static_cast<uint8_t>(frame.type));
  out.insert(out.end(), frame.session.begin(), frame.session.end());
  put_u64(out, frame.payload.size());
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

Frame deserialize_frame(const std::vector<uint8_t>& bytes, uint64_t payload_cap) {
  if (bytes.size() < kFrameHeaderBytes) throw Truncated("frame shorter than header");
  if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), bytes.begin())) {
    throw BadMagic("bad frame magic");
  }
  Frame f;
  const uint8_t type = bytes[4];
  if (!known_type(type)) throw UnknownType("unknown message type " + std::to_string(type));
  f.type = static_cast<MessageType>(type);
  std::copy_n(bytes.begin() + 5, 16, f.session.begin());
  uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<uint64_t>(bytes[21 + static_cast<size_t>(i)]) << (8 * i);
  if (len > payload_cap) throw LengthMismatch("declared payload exceeds cap");
  if (bytes.size() < kFrameHeaderBytes + len) throw Truncated("frame shorter than declared");
  if (bytes.size() > kFrameHeaderBytes + len) throw LengthMismatch("trailing bytes after frame");
  f.payload.assign(bytes.begin() + static_cast<long>(kFrameHeaderBytes), bytes.end());
  return f;
}

std::vector<uint8_t> encode_randomness(const RandomnessMsg& m) {
  std::vector<uint8_t> out;
  const size_t n_f = m.r.n_f();
  out.reserve(8 + 8 * (2 * n_f + 1));
  put_u64(out, n_f);
  for (const auto& e : m.r.r1) put_u64(out, e.v);
  for (const auto& e : m.r.r2) put_u64(out, e.v);
  put_u64(out, m.r.r3.v);
  return out;
}

RandomnessMsg decode_randomness(const std::vector<uint8_t>& payload) {
  Reader rd{payload};
  const uint64_t n_f = rd.u64();
  RandomnessMsg m;
  m.r.r1.resize(n_f);
  m.r.r2.resize(n_f);
  for (auto& e : m.r.r1) e = RingElement{rd.u64()};
  for (auto& e : m.r.r2) e = RingElement{rd.u64()};
  m.r.r3 = RingElement{rd.u64()};
  rd.done();
  return m;
}

std::vector<uint8_t> encode_share_upload(const ShareUploadMsg& m) {
  const ShareBundle& b = m.bundle;
  std::vector<uint8_t> out;
  const size_t tri = b.n * (b.n + 1) / 2;
  out.reserve(1 + 16 + 8 * (b.n_f * b.n + b.n + tri + 2 * b.n));
  put_u8(out, static_cast<uint8_t>(b.role));
  put_u64(out, b.n_f);
  put_u64(out, b.n);
  for (const auto& e : b.masked_matrix.data) put_u64(out, e.v);
  for (const auto& e : b.masked_scalars) put_u64(out, e.v);
  for (size_t i = 0; i < b.n; ++i)
    for (size_t j = 0; j <= i; ++j) put_f64(out, b.local_gram(i, j));
  for (const auto& t : b.labels.targets) {
    put_f64(out, t[0]);
    put_f64(out, t[1]);
  }
  return out;
}

ShareUploadMsg decode_share_upload(const std::vector<uint8_t>& payload) {
  Reader rd{payload};
  ShareUploadMsg m;
  ShareBundle& b = m.bundle;
  const uint8_t role = rd.u8();
  if (role > 1) throw UnknownType("bad role byte " + std::to_string(role));
  b.role = static_cast<Role>(role);
  b.n_f = rd.u64();
  b.n = rd.u64();
  if (b.n_f == 0 || b.n == 0) throw Truncated("share upload with empty dimensions");
  b.masked_matrix = FeatureMatrix(b.n_f, b.n);
  for (auto& e : b.masked_matrix.data) e = RingElement{rd.u64()};
  b.masked_scalars.resize(b.n);
  for (auto& e : b.masked_scalars) e = RingElement{rd.u64()};
  b.local_gram = Mat(b.n, b.n);
  for (size_t i = 0; i < b.n; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      const double v = rd.f64();
      b.local_gram(i, j) = v;
      b.local_gram(j, i) = v;
    }
  }
  b.labels.targets.resize(b.n);
  for (auto& t : b.labels.targets) {
    t[0] = rd.f64();
    t[1] = rd.f64();
  }
  rd.done();
  return m;
}

std::vector<uint8_t> encode_error(const ErrorMsg& m) {
  std::vector<uint8_t> out;
  put_u32(out, m.code);
  out.insert(out.end(), m.message.begin(), m.message.end());
  return out;
}

ErrorMsg decode_error(const std::vector<uint8_t>& payload) {
  Reader rd{payload};
  ErrorMsg m;
  m.code = rd.u32();
  m.message.assign(payload.begin() + 4, payload.end());
  return m;
}

ByteCounters count_frame_bytes(const Frame& frame) {
  ByteCounters c;
  c.framing_bytes = kFrameHeaderBytes;
  switch (frame.type) {
    case MessageType::randomness: {
      // n_f field and r3 are framing; the two mask vectors are protocol data.
      const uint64_t n_f = (frame.payload.size() - 16) / 16;
      c.protocol_bytes = 16 * n_f;
      c.framing_bytes += 16;
      break;
    }
    case MessageType::share_upload: {
      Reader rd{frame.payload};
      rd.u8();
      const uint64_t n_f = rd.u64();
      const uint64_t n = rd.u64();
      c.protocol_bytes = 8 * (n_f * n + n);
      c.auxiliary_bytes = 8 * (n * (n + 1) / 2 + 2 * n);
      c.framing_bytes += 1 + 16;
      break;
    }
    case MessageType::ack:
    case MessageType::error:
      c.framing_bytes += frame.payload.size();
      break;
  }
  return c;
}

}  // namespace rek
