#include "rek/channel.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <thread>

namespace rek {

std::chrono::milliseconds message_timeout() {
  if (const char* env = std::getenv("REK_TIMEOUT_SECS")) {
    const double secs = std::atof(env);
    if (secs > 0.0) return std::chrono::milliseconds(static_cast<long>(secs * 1000.0));
  }
  return std::chrono::milliseconds(30000);
}

std::pair<std::unique_ptr<InProcessChannel>, std::unique_ptr<InProcessChannel>>
InProcessChannel::make_pair() {
  auto a_to_b = std::make_shared<Queue>();
  auto b_to_a = std::make_shared<Queue>();
  auto a = std::unique_ptr<InProcessChannel>(new InProcessChannel(a_to_b, b_to_a));
  auto b = std::unique_ptr<InProcessChannel>(new InProcessChannel(b_to_a, a_to_b));
  return {std::move(a), std::move(b)};
}

void InProcessChannel::send(const Frame& frame) {
  auto bytes = serialize_frame(frame);
  {
    std::lock_guard<std::mutex> lk(tx_->m);
    tx_->q.push_back(std::move(bytes));
  }
  tx_->cv.notify_all();
}

Frame InProcessChannel::recv() {
  std::unique_lock<std::mutex> lk(rx_->m);
  if (!rx_->cv.wait_for(lk, message_timeout(), [&] { return !rx_->q.empty(); })) {
    throw Timeout("in-process recv timed out");
  }
  auto bytes = std::move(rx_->q.front());
  rx_->q.pop_front();
  lk.unlock();
  return deserialize_frame(bytes);
}

namespace {

void set_io_timeout(int fd) {
  const auto ms = message_timeout();
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(ms.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((ms.count() % 1000) * 1000);
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

void write_all(int fd, const uint8_t* data, size_t n) {
  size_t off = 0;
  while (off < n) {
    const ssize_t w = ::send(fd, data + off, n - off, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw Timeout("tcp send timed out");
      throw WireError(std::string("tcp send failed: ") + std::strerror(errno));
    }
    off += static_cast<size_t>(w);
  }
}

void read_all(int fd, uint8_t* data, size_t n) {
  size_t off = 0;
  while (off < n) {
    const ssize_t r = ::recv(fd, data + off, n - off, 0);
    if (r == 0) throw Truncated("peer closed connection mid-frame");
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw Timeout("tcp recv timed out");
      throw WireError(std::string("tcp recv failed: ") + std::strerror(errno));
    }
    off += static_cast<size_t>(r);
  }
}

}  // namespace

TcpChannel::TcpChannel(int fd) : fd_(fd) {
  set_io_timeout(fd_);
  int one = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::send(const Frame& frame) {
  const auto bytes = serialize_frame(frame);
  write_all(fd_, bytes.data(), bytes.size());
}

Frame TcpChannel::recv() {
  std::vector<uint8_t> bytes(kFrameHeaderBytes);
  read_all(fd_, bytes.data(), kFrameHeaderBytes);
  uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<uint64_t>(bytes[21 + static_cast<size_t>(i)]) << (8 * i);
  if (len > kDefaultPayloadCap) throw LengthMismatch("declared payload exceeds cap");
  bytes.resize(kFrameHeaderBytes + len);
  read_all(fd_, bytes.data() + kFrameHeaderBytes, len);
  return deserialize_frame(bytes);
}

std::unique_ptr<TcpChannel> TcpChannel::connect(const std::string& host, uint16_t port) {
  const auto deadline = std::chrono::steady_clock::now() + message_timeout();
  std::string last_error = "unknown";
  while (true) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port_str = std::to_string(port);
    if (getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) == 0 && res) {
      const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
      if (fd >= 0) {
        if (::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
          freeaddrinfo(res);
          return std::make_unique<TcpChannel>(fd);
        }
        last_error = std::strerror(errno);
        ::close(fd);
      }
      freeaddrinfo(res);
    } else {
      last_error = "getaddrinfo failed for " + host;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Timeout("connect to " + host + ":" + port_str + " timed out (" + last_error + ")");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

TcpListener::TcpListener(const std::string& host, uint16_t port) : fd_(-1), port_(port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw WireError(std::string("socket failed: ") + std::strerror(errno));
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = INADDR_ANY;
  } else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw InvalidConfig("cannot parse listen address: " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw WireError("bind to " + host + ":" + std::to_string(port) + " failed: " + err);
  }
  if (::listen(fd_, 8) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw WireError("listen failed: " + err);
  }
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
    port_ = ntohs(addr.sin_port);
  }
  set_io_timeout(fd_);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpListener::accept() {
  while (true) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpChannel>(fd);
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) throw Timeout("accept timed out");
    throw WireError(std::string("accept failed: ") + std::strerror(errno));
  }
}

std::pair<std::string, uint16_t> parse_endpoint(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) throw InvalidConfig("endpoint must be host:port, got " + spec);
  const std::string host = spec.substr(0, colon);
  const std::string port_str = spec.substr(colon + 1);
  char* end = nullptr;
  const long port = std::strtol(port_str.c_str(), &end, 10);
  if (end == port_str.c_str() || *end != '\0' || port < 0 || port > 65535) {
    throw InvalidConfig("invalid port in endpoint: " + spec);
  }
  return {host.empty() ? "127.0.0.1" : host, static_cast<uint16_t>(port)};
}

}  // namespace rek
