#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"

namespace sloow {

struct ControllerConfig {
  double tick_s = 25.0;
  double deadband_lo = 0.1;  // %RH change per tick, inclusive
  double deadband_hi = 0.3;  // inclusive
  int step_pct = 4;
  int clamp_lo = 50;
  int clamp_hi = 90;
  int initial_opening = 70;

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

struct Hold {
  friend bool operator==(Hold, Hold) = default;
};

struct SetOpening {
  int target_pct = 0;
  friend bool operator==(SetOpening, SetOpening) = default;
};

using Command = std::variant<Hold, SetOpening>;

inline bool is_hold(const Command& c) noexcept { return std::holds_alternative<Hold>(c); }

inline std::string to_string(const Command& c) {
  if (const auto* s = std::get_if<SetOpening>(&c)) return "SET " + std::to_string(s->target_pct);
  return "HOLD";
}

struct ControllerState {
  std::optional<double> prev_reading;
  int current_target = 70;

  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

// Tolerance on the deadband edges. Readings live on a 0.01 grid, so this only
// absorbs binary rounding in the subtraction (0.30 - 0.20 < 0.1 in doubles).
inline constexpr double deadband_edge_tolerance = 1e-9;

/// Positions the curtain may be sent to: clamp_lo, clamp_lo + step, ... clamp_hi.
///
/// Eleven positions for the default 50..90 in 4% steps, i.e. ten transitions.
inline std::vector<int> instruction_table(const ControllerConfig& cfg) {
  if (cfg.step_pct <= 0) throw ConfigError("controller.step_pct", "must be > 0");
  if (cfg.clamp_lo > cfg.clamp_hi) throw ConfigError("controller.clamp_lo", "must not exceed clamp_hi");
  if ((cfg.clamp_hi - cfg.clamp_lo) % cfg.step_pct != 0)
    throw ConfigError("controller.step_pct", "clamp range " + std::to_string(cfg.clamp_hi - cfg.clamp_lo) +
                                                 " is not divisible by step " + std::to_string(cfg.step_pct));
  std::vector<int> table;
  for (int p = cfg.clamp_lo; p <= cfg.clamp_hi; p += cfg.step_pct) table.push_back(p);
  return table;
}

inline bool in_table(const ControllerConfig& cfg, int pct) noexcept {
  return cfg.step_pct > 0 && pct >= cfg.clamp_lo && pct <= cfg.clamp_hi && (pct - cfg.clamp_lo) % cfg.step_pct == 0;
}

inline void validate(const ControllerConfig& cfg) {
  if (!(cfg.tick_s > 0.0)) throw ConfigError("controller.tick_s", "must be > 0");
  if (!(cfg.deadband_lo > 0.0)) throw ConfigError("controller.deadband_lo", "must be > 0");
  if (!(cfg.deadband_lo < cfg.deadband_hi))
    throw ConfigError("controller.deadband_hi", "must be greater than deadband_lo (0 < deadband_lo < deadband_hi)");
  if (cfg.clamp_lo < 0 || cfg.clamp_hi > 100) throw ConfigError("controller.clamp_lo", "clamp range must lie in [0,100]");
  if (cfg.clamp_lo >= cfg.clamp_hi) throw ConfigError("controller.clamp_lo", "must be below clamp_hi");
  instruction_table(cfg);
  if (!in_table(cfg, cfg.initial_opening))
    throw ConfigError("controller.initial_opening", "must be a position in the instruction table");
}

inline ControllerState initial_state(const ControllerConfig& cfg) { return {std::nullopt, cfg.initial_opening}; }

struct Decision {
  Command command;
  ControllerState state;
};

/// One controller tick.
///
/// A rise of deadband_lo..deadband_hi since the previous reading closes the
/// curtain one step; an equal fall opens it. Smaller or larger changes are
/// treated as noise. A step that would cross a clamp yields Hold.
inline Decision decide(ControllerState state, double reading, const ControllerConfig& cfg) {
  Command cmd = Hold{};
  if (state.prev_reading) {
    const double delta = reading - *state.prev_reading;
    const double mag = delta < 0 ? -delta : delta;
    const bool triggered =
        mag >= cfg.deadband_lo - deadband_edge_tolerance && mag <= cfg.deadband_hi + deadband_edge_tolerance;
    if (triggered) {
      const int target = delta > 0 ? std::max(state.current_target - cfg.step_pct, cfg.clamp_lo)
                                   : std::min(state.current_target + cfg.step_pct, cfg.clamp_hi);
      if (target != state.current_target) {
        cmd = SetOpening{target};
        state.current_target = target;
      }
    }
  }
  state.prev_reading = reading;
  return {cmd, state};
}

}  // namespace sloow
