#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "../controller.hpp"
#include "../error.hpp"
#include "../microclimate.hpp"
#include "protocol.hpp"
#include "socket.hpp"

namespace sloow::bridge {

// Source of humidity readings for the live loop, one per tick.
class SensorSource {
 public:
  virtual ~SensorSource() = default;
  virtual std::optional<double> next() = 0;
};

class ScriptedSensor : public SensorSource {
 public:
  explicit ScriptedSensor(std::vector<double> readings) : readings_(std::move(readings)) {}

  std::optional<double> next() override {
    if (pos_ >= readings_.size()) return std::nullopt;
    return readings_[pos_++];
  }

 private:
  std::vector<double> readings_;
  std::size_t pos_ = 0;
};

// One reading per line; blank lines and `#` comments are skipped.
inline std::vector<double> load_readings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sensor file '" + path + "'");
  std::vector<double> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    const std::string_view text(line.data() + first, last - first + 1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v < 0.0 || v > 100.0)
      throw InputError(path + ":" + std::to_string(n) + ": not a humidity reading in [0,100]");
    out.push_back(v);
  }
  return out;
}

struct DriveOptions {
  double tick_s = 25.0;
  bool real_time = false;  // pace ticks on the wall clock
  int max_attempts = 3;
  std::chrono::milliseconds backoff_initial{100};
  std::chrono::milliseconds backoff_cap{1000};
  std::chrono::milliseconds io_timeout{2000};
};

enum class DriveStatus { held, ok, reconciled, failed };

inline const char* status_name(DriveStatus s) {
  switch (s) {
    case DriveStatus::held: return "held";
    case DriveStatus::ok: return "ok";
    case DriveStatus::reconciled: return "reconciled";
    case DriveStatus::failed: return "failed";
  }
  return "?";
}

struct DriveLogEntry {
  std::size_t tick = 0;
  double t = 0.0;  // tick * tick_s
  double reading = 0.0;
  Command command = Hold{};
  std::string reply;  // without LF; empty for Hold
  DriveStatus status = DriveStatus::held;
  int target_after = 0;  // controller target once the reply is reconciled
  std::chrono::steady_clock::time_point wall_time;
};

namespace detail {

// Client side of one device connection, reconnecting on demand.
class DeviceLink {
 public:
  DeviceLink(Endpoint ep, const DriveOptions& opts) : ep_(std::move(ep)), opts_(opts) {}

  // Sends one request and waits for its reply, reconnecting with capped
  // exponential backoff on I/O failure. nullopt once all attempts fail.
  std::optional<Decoded> request(const Message& msg, std::optional<int>* hello_opening = nullptr) {
    auto backoff = opts_.backoff_initial;
    for (int attempt = 0; attempt < opts_.max_attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, opts_.backoff_cap);
      }
      try {
        if (!sock_.valid()) {
          auto opening = connect();
          if (hello_opening) *hello_opening = opening;
          if (std::holds_alternative<Hello>(msg)) return Decoded{Message{Ok{opening}}};
        }
        return exchange(msg);
      } catch (const IoError&) {
        sock_.close();
        reader_.reset();
      }
    }
    return std::nullopt;
  }

  void close() {
    if (sock_.valid()) {
      try {
        exchange(Bye{});
      } catch (const IoError&) {
      }
    }
    sock_.close();
    reader_.reset();
  }

 private:
  int connect() {
    sock_ = connect_to(ep_, opts_.io_timeout);
    reader_.emplace(sock_);
    auto reply = exchange(Hello{});
    if (const auto* m = std::get_if<Message>(&reply))
      if (const auto* ok = std::get_if<Ok>(m)) return ok->pct;
    throw IoError("device at " + ep_.to_string() + " rejected HELLO");
  }

  Decoded exchange(const Message& msg) {
    write_all(sock_, encode(msg));
    auto line = reader_->next();
    if (!line) throw IoError("device closed the connection");
    if (line->overlong) return DecodeError{ErrorCode::parse};
    return decode(line->text);
  }

  Endpoint ep_;
  DriveOptions opts_;
  Socket sock_;
  std::optional<LineReader> reader_;
};

inline std::string reply_text(const Decoded& d) {
  if (const auto* m = std::get_if<Message>(&d)) {
    auto s = encode(*m);
    s.pop_back();
    return s;
  }
  return "<undecodable>";
}

}  // namespace detail

/// Runs the controller against a networked curtain until the sensor source is
/// exhausted.
///
/// Each SetOpening becomes exactly one SET; Hold sends nothing. The device's
/// confirmed opening is authoritative: an OK that differs from the command, or
/// an ERR, moves the controller's target back to what the device reports.
/// Controller state survives reconnects.
inline std::vector<DriveLogEntry> drive(const ControllerConfig& cfg, SensorSource& sensor, const Endpoint& device,
                                        const DriveOptions& opts = {}) {
  validate(cfg);
  detail::DeviceLink link(device, opts);
  ControllerState ctrl = initial_state(cfg);

  std::optional<int> confirmed;
  auto adopt = [&](int opening) {
    confirmed = opening;
    if (in_table(cfg, opening)) ctrl.current_target = opening;
  };

  std::optional<int> hello_opening;
  auto hello = link.request(Hello{}, &hello_opening);
  if (!hello) throw IoError("device at " + device.to_string() + " is unreachable");
  if (hello_opening) adopt(*hello_opening);

  std::vector<DriveLogEntry> log;
  const auto start = std::chrono::steady_clock::now();
  const auto tick_period = std::chrono::duration<double>(opts.tick_s);
  for (std::size_t k = 0;; ++k) {
    if (opts.real_time)
      std::this_thread::sleep_until(start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(tick_period * k));
    auto reading = sensor.next();
    if (!reading) break;

    const int before = ctrl.current_target;
    auto [cmd, next] = decide(ctrl, *reading, cfg);
    ctrl = next;
    DriveLogEntry entry{k, static_cast<double>(k) * opts.tick_s, *reading, cmd, "", DriveStatus::held, 0,
                        std::chrono::steady_clock::now()};

    if (const auto* set = std::get_if<SetOpening>(&cmd)) {
      std::optional<int> reconnect_opening;
      auto reply = link.request(Set{set->target_pct}, &reconnect_opening);
      if (reconnect_opening) confirmed = *reconnect_opening;
      const Ok* ok = nullptr;
      if (reply)
        if (const auto* m = std::get_if<Message>(&*reply)) ok = std::get_if<Ok>(m);
      if (ok) {
        entry.reply = detail::reply_text(*reply);
        entry.status = ok->pct == set->target_pct ? DriveStatus::ok : DriveStatus::reconciled;
        adopt(ok->pct);
        if (!in_table(cfg, ok->pct)) ctrl.current_target = before;
      } else {
        entry.reply = reply ? detail::reply_text(*reply) : "<no connection>";
        entry.status = DriveStatus::failed;
        ctrl.current_target = confirmed && in_table(cfg, *confirmed) ? *confirmed : before;
      }
    }
    entry.target_after = ctrl.current_target;
    log.push_back(std::move(entry));
  }
  link.close();
  return log;
}

inline std::string drive_log_csv(const std::vector<DriveLogEntry>& log) {
  std::string out = "tick,t_s,reading,cmd,reply,status,target\n";
  char t[32], r[32];
  for (const auto& e : log) {
    std::snprintf(t, sizeof t, "%.4f", e.t);
    std::snprintf(r, sizeof r, "%.4f", e.reading);
    out += std::to_string(e.tick) + "," + t + "," + r + "," +
           to_string(e.command) + "," + e.reply + "," + status_name(e.status) + "," + std::to_string(e.target_after) +
           "\n";
  }
  return out;
}

}  // namespace sloow::bridge
