#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "controller.hpp"
#include "error.hpp"
#include "random.hpp"

namespace sloow {

// Smart curtain: integer opening with a rate-limited ramp toward its target.
struct CurtainState {
  int opening_pct = 70;
  int target_pct = 70;
  double ramp_rate = 2.0;    // %/s
  double ramp_credit = 0.0;  // fractional % accumulated toward the next 1% move

  friend bool operator==(const CurtainState&, const CurtainState&) = default;
};

// The voice link between controller and curtain.
struct CommandChannel {
  double drop_prob = 0.0;
  double delay_s = 1.0;

  friend bool operator==(const CommandChannel&, const CommandChannel&) = default;
};

struct LightModel {
  double transmissivity_closed = 0.1;
  double transmissivity_open = 1.0;
  double sunrise_s = 21600.0;
  double sunset_s = 64800.0;

  friend bool operator==(const LightModel&, const LightModel&) = default;
};

inline constexpr double curtain_sway_period_s = 1800.0;

inline void validate(const LightModel& m) {
  if (!(m.transmissivity_closed >= 0.0 && m.transmissivity_closed < m.transmissivity_open &&
        m.transmissivity_open <= 1.0))
    throw ConfigError("light.transmissivity_closed", "need 0 <= closed < open <= 1");
  if (!(m.sunrise_s >= 0.0 && m.sunrise_s < m.sunset_s && m.sunset_s <= 86400.0))
    throw ConfigError("light.sunrise_s", "need 0 <= sunrise < sunset <= 86400");
}

inline void validate(const CommandChannel& c) {
  if (!(c.drop_prob >= 0.0 && c.drop_prob <= 1.0)) throw ConfigError("actuator.drop_prob", "must be in [0,1]");
  if (!(c.delay_s >= 0.0)) throw ConfigError("actuator.delay_s", "must be >= 0");
}

inline void check_target(int pct) {
  if (pct < 0 || pct > 100) throw DeviceError("target " + std::to_string(pct) + "% outside [0,100]");
}

// Accepts a new target; the opening follows via advance().
inline CurtainState set_target(CurtainState state, int pct) {
  check_target(pct);
  if (state.target_pct != pct) state.ramp_credit = 0.0;
  state.target_pct = pct;
  return state;
}

// Moves the opening toward the target for dt seconds at ramp_rate.
inline CurtainState advance(CurtainState state, double dt) noexcept {
  if (state.opening_pct == state.target_pct) {
    state.ramp_credit = 0.0;
    return state;
  }
  state.ramp_credit += state.ramp_rate * dt;
  const double whole = std::floor(state.ramp_credit);
  const int gap = std::abs(state.target_pct - state.opening_pct);
  const int moved = static_cast<int>(std::min<double>(whole, gap));
  state.ramp_credit -= moved;
  state.opening_pct += state.target_pct > state.opening_pct ? moved : -moved;
  if (state.opening_pct == state.target_pct) state.ramp_credit = 0.0;
  return state;
}

// Whether the channel carries this transmission. Consumes one draw.
inline bool channel_delivers(const CommandChannel& channel, RandomStream& rng) {
  return !rng.bernoulli(channel.drop_prob);
}

struct ApplyResult {
  CurtainState state;
  bool dropped = false;
};

/// Sends a command through the channel and, if it arrives, retargets the
/// curtain. The channel delay is left to the caller's scheduler.
inline ApplyResult apply_command(const CurtainState& state, const Command& cmd, const CommandChannel& channel,
                                 RandomStream& rng) {
  const auto* set = std::get_if<SetOpening>(&cmd);
  if (!set) return {state, false};
  check_target(set->target_pct);
  if (!channel_delivers(channel, rng)) return {state, true};
  return {set_target(state, set->target_pct), false};
}

inline double diurnal_factor(double t_of_day_s, const LightModel& model) noexcept {
  const double t = std::fmod(t_of_day_s, 86400.0);
  if (t <= model.sunrise_s || t >= model.sunset_s) return 0.0;
  return std::sin(std::numbers::pi * (t - model.sunrise_s) / (model.sunset_s - model.sunrise_s));
}

// Fraction of full light reaching the sill.
inline double light_fraction(int opening_pct, double t_of_day_s, const LightModel& model) {
  if (opening_pct < 0 || opening_pct > 100) throw InputError("light_fraction: opening outside [0,100]");
  const double transmit = model.transmissivity_closed +
                          (model.transmissivity_open - model.transmissivity_closed) * opening_pct / 100.0;
  return std::clamp(diurnal_factor(t_of_day_s, model) * transmit, 0.0, 1.0);
}

// Reference motion for the time-lapse: one full sway every 30 minutes.
inline double curtain_sway(double t) {
  if (!(t >= 0.0)) throw InputError("curtain_sway: t must be >= 0");
  const double phase = std::fmod(t, curtain_sway_period_s) / curtain_sway_period_s;
  return std::sin(2.0 * std::numbers::pi * phase);
}

}  // namespace sloow
