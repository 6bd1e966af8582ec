#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "../error.hpp"
#include "protocol.hpp"

namespace sloow::bridge {

// host:port, IPv4 or a resolvable name. Port 0 asks the OS for a free port.
struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7070;

  std::string to_string() const { return host + ":" + std::to_string(port); }

  static Endpoint parse(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) throw InputError("endpoint '" + std::string(text) + "' is not host:port");
    Endpoint e;
    e.host = std::string(text.substr(0, colon));
    if (e.host.empty()) e.host = "127.0.0.1";
    const auto port_text = text.substr(colon + 1);
    unsigned port = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535)
      throw InputError("endpoint '" + std::string(text) + "' has an invalid port");
    e.port = static_cast<std::uint16_t>(port);
    return e;
  }
};

// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }

  void close() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  // Wakes any thread blocked on this socket without releasing the fd.
  void shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  int fd_ = -1;
};

namespace detail {

inline sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw IoError("cannot resolve host '" + ep.host + "'");
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

inline std::string errno_text() { return std::strerror(errno); }

}  // namespace detail

inline Socket listen_on(const Endpoint& ep) {
  sockaddr_in addr = detail::resolve(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw StartupError("socket: " + detail::errno_text());
  int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    throw StartupError("cannot bind " + ep.to_string() + ": " + detail::errno_text());
  if (::listen(s.fd(), 16) != 0) throw StartupError("cannot listen on " + ep.to_string() + ": " + detail::errno_text());
  return s;
}

inline std::uint16_t local_port(const Socket& s) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

// Connects with a receive timeout so a silent peer surfaces as an IoError.
inline Socket connect_to(const Endpoint& ep, std::chrono::milliseconds io_timeout) {
  sockaddr_in addr = detail::resolve(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw IoError("socket: " + detail::errno_text());
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(io_timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((io_timeout.count() % 1000) * 1000);
  ::setsockopt(s.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(s.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    throw IoError("cannot connect to " + ep.to_string() + ": " + detail::errno_text());
  return s;
}

inline void write_all(const Socket& s, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(s.fd(), data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw IoError("send: " + detail::errno_text());
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

/// Splits a byte stream into LF-terminated lines of at most max_line_bytes.
///
/// An overlong line is reported once as `overlong` and its remaining bytes are
/// discarded up to and including the next LF.
class LineReader {
 public:
  struct Line {
    std::string text;  // includes the LF
    bool overlong = false;
  };

  explicit LineReader(const Socket& s) : sock_(&s) {}

  // nullopt on orderly EOF; throws IoError on a socket error or timeout.
  std::optional<Line> next() {
    while (true) {
      if (auto line = take()) return line;
      char chunk[256];
      const ssize_t n = ::recv(sock_->fd(), chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw IoError("recv: " + detail::errno_text());
      if (n == 0) return std::nullopt;
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  std::optional<Line> take() {
    while (true) {
      const auto lf = buf_.find('\n');
      if (discarding_) {
        if (lf == std::string::npos) {
          buf_.clear();
          return std::nullopt;
        }
        buf_.erase(0, lf + 1);
        discarding_ = false;
        continue;
      }
      if (lf != std::string::npos && lf + 1 <= max_line_bytes) {
        Line l{buf_.substr(0, lf + 1), false};
        buf_.erase(0, lf + 1);
        return l;
      }
      if (buf_.size() >= max_line_bytes) {
        // No LF within the cap.
        if (lf != std::string::npos) {
          buf_.erase(0, lf + 1);
        } else {
          buf_.clear();
          discarding_ = true;
        }
        return Line{{}, true};
      }
      return std::nullopt;
    }
  }

  const Socket* sock_;
  std::string buf_;
  bool discarding_ = false;
};

}  // namespace sloow::bridge
