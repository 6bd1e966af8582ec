#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <list>
#include <mutex>
#include <thread>

#include "../actuator.hpp"
#include "../random.hpp"
#include "protocol.hpp"
#include "socket.hpp"

namespace sloow::bridge {

/// A fake curtain owned by one worker thread. Every mutation and read goes
/// through a single FIFO, so concurrent sessions are applied one at a time in
/// arrival order.
class Device {
 public:
  explicit Device(CurtainState initial, CommandChannel channel = {.drop_prob = 0.0, .delay_s = 0.0},
                  std::uint64_t seed = 0)
      : state_(initial), channel_(channel), rng_(seed, "device-channel"), worker_([this] { run(); }) {}

  Device(const Device&) = delete;
  Device& operator=(const Device&) = delete;

  ~Device() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    worker_.join();
  }

  // Retargets through the actuator model and lets the ramp settle. Returns the
  // resulting opening; a dropped command leaves it unchanged.
  int set(int pct) {
    return submit([this, pct] {
      state_ = apply_command(state_, SetOpening{pct}, channel_, rng_).state;
      while (state_.opening_pct != state_.target_pct) state_ = advance(state_, 1.0);
      return state_.opening_pct;
    });
  }

  int get() {
    return submit([this] { return state_.opening_pct; });
  }

 private:
  int submit(std::function<int()> fn) {
    std::packaged_task<int()> task(std::move(fn));
    auto fut = task.get_future();
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(task));
    }
    cv_.notify_one();
    return fut.get();
  }

  void run() {
    while (true) {
      std::packaged_task<int()> task;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      task();
    }
  }

  CurtainState state_;
  CommandChannel channel_;
  RandomStream rng_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::packaged_task<int()>> queue_;
  bool stopping_ = false;
  std::thread worker_;  // last: starts after everything it touches
};

enum class SessionState { awaiting_hello, ready, closed };

/// Protocol state for one connection. Pure apart from the device calls, so it
/// can be exercised without sockets.
class DeviceSession {
 public:
  explicit DeviceSession(Device& device) : device_(&device) {}

  SessionState state() const noexcept { return state_; }

  // Reply to one received line (LF included).
  std::string handle(std::string_view line) { return encode(reply_to(decode(line))); }

  std::string handle_overlong() { return encode(Err{ErrorCode::parse}); }

 private:
  Message reply_to(const Decoded& decoded) {
    if (const auto* err = std::get_if<DecodeError>(&decoded)) return Err{err->code};
    const auto& msg = std::get<Message>(decoded);

    if (std::holds_alternative<Bye>(msg)) {
      state_ = SessionState::closed;
      return Bye{};
    }
    if (const auto* hello = std::get_if<Hello>(&msg)) {
      if (state_ != SessionState::awaiting_hello || hello->version != protocol_version) return Err{ErrorCode::state};
      state_ = SessionState::ready;
      return Ok{device_->get()};
    }
    if (state_ != SessionState::ready) return Err{ErrorCode::state};
    if (const auto* set = std::get_if<Set>(&msg)) return Ok{device_->set(set->pct)};
    if (std::holds_alternative<Get>(msg)) return Ok{device_->get()};
    // OK / ERR are server-to-client only.
    return Err{ErrorCode::state};
  }

  Device* device_;
  SessionState state_ = SessionState::awaiting_hello;
};

/// TCP front end for a Device. Binds in the constructor (StartupError when the
/// endpoint is taken) and serves sessions until stop().
class DeviceServer {
 public:
  DeviceServer(CurtainState initial, const Endpoint& endpoint, CommandChannel channel = {.drop_prob = 0.0, .delay_s = 0.0},
               std::uint64_t seed = 0)
      : device_(initial, channel, seed), listener_(listen_on(endpoint)), port_(local_port(listener_)) {
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  DeviceServer(const DeviceServer&) = delete;
  DeviceServer& operator=(const DeviceServer&) = delete;

  ~DeviceServer() { stop(); }

  std::uint16_t port() const noexcept { return port_; }
  Device& device() noexcept { return device_; }

  void stop() {
    if (stopping_.exchange(true)) return;
    if (acceptor_.joinable()) acceptor_.join();
    std::list<Session> sessions;
    {
      std::lock_guard lock(mu_);
      for (auto& s : sessions_) s.sock.shutdown();
      sessions.splice(sessions.end(), sessions_);
    }
    for (auto& s : sessions)
      if (s.thread.joinable()) s.thread.join();
  }

 private:
  struct Session {
    Socket sock;
    std::thread thread;
    std::atomic<bool> done = false;
  };

  void accept_loop() {
    while (!stopping_) {
      pollfd pfd{listener_.fd(), POLLIN, 0};
      if (::poll(&pfd, 1, 50) <= 0) continue;
      Socket conn(::accept(listener_.fd(), nullptr, nullptr));
      if (!conn.valid()) continue;
      std::lock_guard lock(mu_);
      reap();
      auto& s = sessions_.emplace_back();
      s.sock = std::move(conn);
      s.thread = std::thread([this, &s] {
        serve_session(s.sock);
        s.done = true;
      });
    }
    listener_.close();
  }

  // Joins finished sessions. Caller holds mu_.
  void reap() {
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (it->done) {
        it->thread.join();
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void serve_session(const Socket& sock) {
    DeviceSession session(device_);
    LineReader reader(sock);
    try {
      while (session.state() != SessionState::closed) {
        auto line = reader.next();
        if (!line) break;
        write_all(sock, line->overlong ? session.handle_overlong() : session.handle(line->text));
      }
    } catch (const IoError&) {
      // Peer vanished; nothing to clean up beyond the socket.
    }
    ::shutdown(sock.fd(), SHUT_RDWR);
  }

  Device device_;
  Socket listener_;
  std::uint16_t port_;
  std::atomic<bool> stopping_ = false;
  std::mutex mu_;
  std::list<Session> sessions_;
  std::thread acceptor_;
};

}  // namespace sloow::bridge
