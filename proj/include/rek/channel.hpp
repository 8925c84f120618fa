#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rek/wire.hpp"

namespace rek {

// Message timeout; REK_TIMEOUT_SECS overrides the 30 s default.
std::chrono::milliseconds message_timeout();

// One endpoint of a duplex frame channel. Channels are single-owner per
// direction: one thread sends, one thread receives.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Frame& frame) = 0;
  virtual Frame recv() = 0;  // throws Timeout after message_timeout()
};

// Directional transcript entry, recorded by RecordingChannel.
struct TranscriptEntry {
  bool outgoing = false;
  Frame frame;
};

using Transcript = std::vector<TranscriptEntry>;

// Wraps a channel and logs every frame that passes through. Audit-only.
class RecordingChannel final : public Channel {
 public:
  RecordingChannel(Channel& inner, Transcript& log) : inner_(inner), log_(log) {}
  void send(const Frame& frame) override {
    log_.push_back({true, frame});
    inner_.send(frame);
  }
  Frame recv() override {
    Frame f = inner_.recv();
    log_.push_back({false, f});
    return f;
  }

 private:
  Channel& inner_;
  Transcript& log_;
};

// In-process duplex channel pair backed by two locked deques. Frames are
// serialized and reparsed so the byte path matches TCP exactly.
class InProcessChannel final : public Channel {
 public:
  static std::pair<std::unique_ptr<InProcessChannel>, std::unique_ptr<InProcessChannel>> make_pair();

  void send(const Frame& frame) override;
  Frame recv() override;

 private:
  struct Queue {
    std::mutex m;
    std::condition_variable cv;
    std::deque<std::vector<uint8_t>> q;
  };
  InProcessChannel(std::shared_ptr<Queue> tx, std::shared_ptr<Queue> rx)
      : tx_(std::move(tx)), rx_(std::move(rx)) {}

  std::shared_ptr<Queue> tx_, rx_;
};

// Blocking TCP channel with per-message deadlines.
class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send(const Frame& frame) override;
  Frame recv() override;

  // Connects with retries until the message timeout elapses.
  static std::unique_ptr<TcpChannel> connect(const std::string& host, uint16_t port);

 private:
  int fd_;
};

// Listening socket accepting TcpChannels.
class TcpListener {
 public:
  TcpListener(const std::string& host, uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::unique_ptr<TcpChannel> accept();
  uint16_t port() const { return port_; }

 private:
  int fd_;
  uint16_t port_;
};

// "host:port" or ":port" (0.0.0.0).
std::pair<std::string, uint16_t> parse_endpoint(const std::string& spec);

}  // namespace rek
