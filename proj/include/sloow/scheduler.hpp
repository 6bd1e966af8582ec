#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "error.hpp"

namespace sloow {

using Millis = std::int64_t;

constexpr Millis to_millis(double seconds) { return static_cast<Millis>(std::llround(seconds * 1000.0)); }
constexpr double to_seconds(Millis ms) { return static_cast<double>(ms) / 1000.0; }

// Same-instant firing order. Lower ordinal fires first.
enum class EventPriority : std::uint8_t {
  disturbance = 0,
  microclimate_step = 1,
  sensor_read = 2,
  controller = 3,
  actuator = 4,
  camera = 5,
};

// Monotone simulation clock in integer milliseconds.
class SimClock {
 public:
  Millis now_ms() const noexcept { return now_; }
  double now() const noexcept { return to_seconds(now_); }

  void advance_to(Millis t) {
    if (t < now_) throw InputError("SimClock: time moved backwards");
    now_ = t;
  }

 private:
  Millis now_ = 0;
};

/// Discrete-event queue ordered by (time, priority, insertion order).
///
/// Insertion order breaks remaining ties so that two events scheduled for the
/// same instant and priority fire in the order they were scheduled.
template <typename Payload>
class EventQueue {
 public:
  struct Event {
    Millis time;
    EventPriority priority;
    std::uint64_t seq;
    Payload payload;
  };

  void schedule(Millis time, EventPriority priority, Payload payload) {
    heap_.push(Event{time, priority, next_seq_++, std::move(payload)});
  }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  const Event& top() const { return heap_.top(); }

  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace sloow
