#pragma once

#include <cctype>
#include <cstdio>
#include <string>
#include <vector>

#include "actuator.hpp"
#include "controller.hpp"
#include "flora.hpp"
#include "metrics.hpp"
#include "microclimate.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "scheduler.hpp"
#include "timelapse.hpp"

namespace sloow {

struct SensorLogEntry {
  double t = 0.0;
  double rh_true = 0.0;
  double rh_read = 0.0;
  double noise = 0.0;  // raw noise sample added before quantization
  int opening_pct = 0;
  double light_frac = 0.0;
  Command decision = Hold{};
};

// One non-Hold controller decision. Openings are the commanded targets before
// and after; `dropped` marks a command the channel lost.
struct CommandLogEntry {
  double t = 0.0;
  SetOpening command;
  int pre_opening = 0;
  int post_opening = 0;
  bool dropped = false;
};

struct SimTrace {
  std::vector<FrameEvent> frames;
  std::vector<CommandLogEntry> commands;
  std::vector<SensorLogEntry> sensor_log;
};

inline constexpr const char* curtain_motion_label = "curtain/sway";

inline std::string slug(std::string_view name) {
  std::string out;
  for (char c : name) out += c == ' ' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string motion_label(const PlantSpecies& species, const Movement& m) {
  return slug(species.name) + "/" + m.label;
}

namespace detail {

enum class EventKind { disturbance, microclimate, sensor, controller, actuator_ramp, delivery, camera };

struct SimEvent {
  EventKind kind;
  int target = 0;
};

}  // namespace detail

/// Runs the closed loop: every agent adds humidity flux to one shared state,
/// the controller sees only the sensor reading of that state, and the curtain
/// it moves sets the light that drives transpiration.
inline SimTrace run_scenario(const ScenarioConfig& cfg) {
  using detail::EventKind;
  validate(cfg);

  const Millis duration = to_millis(cfg.duration_s);
  const Millis step = to_millis(cfg.step_s);
  const Millis tick = to_millis(cfg.controller.tick_s);
  const Millis frame_interval = to_millis(cfg.capture_interval_s);
  const Millis gust = to_millis(cfg.disturbance.wind_gust_s);
  const Millis delay = to_millis(cfg.channel.delay_s);
  const double dt = to_seconds(step);

  RandomStream wind_rng(cfg.seed, "wind");
  RandomStream sensor_rng(cfg.seed, "sensor");
  RandomStream channel_rng(cfg.seed, "channel");

  MicroclimateState climate{cfg.rh_initial, cfg.rh_exterior, cfg.air_exchange_per_s};
  CurtainState curtain{cfg.controller.initial_opening, cfg.controller.initial_opening, cfg.ramp_rate, 0.0};
  ControllerState ctrl = initial_state(cfg.controller);
  FluxSet fluxes;
  double human_flux = 0.0;
  double wind_flux = 0.0;
  double last_reading = quantize_rh(cfg.rh_initial);

  auto time_of_day = [&](Millis t) {
    return cfg.constant_time_of_day ? cfg.start_time_of_day_s : cfg.start_time_of_day_s + to_seconds(t);
  };
  auto light_at = [&](Millis t) { return light_fraction(curtain.opening_pct, time_of_day(t), cfg.light); };
  auto compose_fluxes = [&](Millis t) {
    const double light = light_at(t);
    double plant = 0.0;
    for (const auto& s : cfg.species) plant += transpiration_flux(s, light, climate.rh_percent);
    fluxes = FluxSet{plant, human_flux, wind_flux};
  };

  SimTrace trace;
  SimClock clock;
  EventQueue<detail::SimEvent> queue;
  auto schedule = [&](Millis t, EventPriority p, detail::SimEvent e) {
    if (t <= duration) queue.schedule(t, p, e);
  };
  schedule(0, EventPriority::disturbance, {EventKind::disturbance});
  schedule(0, EventPriority::microclimate_step, {EventKind::microclimate});
  schedule(0, EventPriority::sensor_read, {EventKind::sensor});
  schedule(0, EventPriority::controller, {EventKind::controller});
  schedule(step, EventPriority::actuator, {EventKind::actuator_ramp});
  schedule(0, EventPriority::camera, {EventKind::camera});

  while (!queue.empty()) {
    const auto ev = queue.pop();
    clock.advance_to(ev.time);
    const Millis t = ev.time;

    switch (ev.payload.kind) {
      case EventKind::disturbance: {
        human_flux = 0.0;
        for (const auto& p : cfg.disturbance.human_presence)
          if (t >= to_millis(p.start_s) && t < to_millis(p.end_s)) human_flux += p.flux;
        if (t % gust == 0)
          wind_flux = cfg.disturbance.wind_amplitude > 0.0 ? cfg.disturbance.wind_amplitude * wind_rng.gaussian() : 0.0;
        schedule(t + step, EventPriority::disturbance, {EventKind::disturbance});
        break;
      }
      case EventKind::microclimate: {
        // Integrate the interval just ended with the fluxes composed at its
        // start, then compose the fluxes for the next one.
        if (t > 0) climate = step_rh(climate, fluxes, dt);
        compose_fluxes(t);
        schedule(t + step, EventPriority::microclimate_step, {EventKind::microclimate});
        break;
      }
      case EventKind::sensor: {
        const double noise = cfg.sensor.noise_sd > 0.0 ? cfg.sensor.noise_sd * sensor_rng.gaussian() : 0.0;
        last_reading = sensor_read_with_noise(climate, cfg.sensor, fluxes, noise);
        trace.sensor_log.push_back(
            {to_seconds(t), climate.rh_percent, last_reading, noise, curtain.opening_pct, light_at(t), Hold{}});
        schedule(t + tick, EventPriority::sensor_read, {EventKind::sensor});
        break;
      }
      case EventKind::controller: {
        const int before = ctrl.current_target;
        auto [cmd, next] = decide(ctrl, last_reading, cfg.controller);
        ctrl = next;
        if (!trace.sensor_log.empty()) trace.sensor_log.back().decision = cmd;
        if (const auto* set = std::get_if<SetOpening>(&cmd)) {
          const bool delivered = channel_delivers(cfg.channel, channel_rng);
          trace.commands.push_back({to_seconds(t), *set, before, ctrl.current_target, !delivered});
          if (delivered) schedule(t + delay, EventPriority::actuator, {EventKind::delivery, set->target_pct});
        }
        schedule(t + tick, EventPriority::controller, {EventKind::controller});
        break;
      }
      case EventKind::delivery:
        curtain = set_target(curtain, ev.payload.target);
        break;
      case EventKind::actuator_ramp:
        curtain = advance(curtain, dt);
        schedule(t + step, EventPriority::actuator, {EventKind::actuator_ramp});
        break;
      case EventKind::camera: {
        FrameEvent f;
        f.t = to_seconds(t);
        f.rh_true = climate.rh_percent;
        f.rh_read = last_reading;
        f.opening_pct = curtain.opening_pct;
        f.light_frac = light_at(t);
        f.motions[curtain_motion_label] = curtain_sway(f.t);
        for (const auto& s : cfg.species)
          for (const auto& m : s.movements) f.motions[motion_label(s, m)] = movement_position(m, f.t);
        trace.frames.push_back(std::move(f));
        schedule(t + frame_interval, EventPriority::camera, {EventKind::camera});
        break;
      }
    }
  }
  return trace;
}

namespace csv {

// Fixed four decimals; negative zero prints as zero.
inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

}  // namespace csv

inline constexpr const char* trace_csv_header = "t_s,rh_true,rh_read,opening_pct,light_frac,cmd";

/// One row per sensor tick (cmd = HOLD or SET <pct>) and one per camera tick
/// (cmd empty), in firing order.
inline std::string trace_csv(const SimTrace& trace) {
  std::string out = std::string(trace_csv_header) + "\n";
  auto row = [&](double t, double rh_true, double rh_read, int opening, double light, const std::string& cmd) {
    out += csv::fixed4(t) + "," + csv::fixed4(rh_true) + "," + csv::fixed4(rh_read) + "," + std::to_string(opening) +
           "," + csv::fixed4(light) + "," + cmd + "\n";
  };
  std::size_t i = 0, j = 0;
  const auto& s = trace.sensor_log;
  const auto& f = trace.frames;
  while (i < s.size() || j < f.size()) {
    if (j == f.size() || (i < s.size() && s[i].t <= f[j].t)) {
      row(s[i].t, s[i].rh_true, s[i].rh_read, s[i].opening_pct, s[i].light_frac, to_string(s[i].decision));
      ++i;
    } else {
      row(f[j].t, f[j].rh_true, f[j].rh_read, f[j].opening_pct, f[j].light_frac, "");
      ++j;
    }
  }
  return out;
}

// Columns t_s,rh_true,opening_pct,light_frac then one per motion label.
inline std::string frame_csv(const std::vector<FrameEvent>& frames) {
  std::string out = "t_s,rh_true,opening_pct,light_frac";
  if (!frames.empty())
    for (const auto& [label, _] : frames.front().motions) out += "," + label;
  out += "\n";
  for (const auto& f : frames) {
    out += csv::fixed4(f.t) + "," + csv::fixed4(f.rh_true) + "," + std::to_string(f.opening_pct) + "," +
           csv::fixed4(f.light_frac);
    for (const auto& [_, v] : f.motions) out += "," + csv::fixed4(v);
    out += "\n";
  }
  return out;
}

inline std::vector<RhSample> true_rh_series(const SimTrace& trace) {
  std::vector<RhSample> out;
  out.reserve(trace.sensor_log.size());
  for (const auto& e : trace.sensor_log) out.push_back({e.t, e.rh_true});
  return out;
}

inline std::string summary_text(const ScenarioConfig& cfg, const SimTrace& trace) {
  std::size_t dropped = 0;
  for (const auto& c : trace.commands) dropped += c.dropped;
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "seed: %llu\nduration_s: %s\nsensor_ticks: %zu\nframes: %zu\ncommands: %zu\ndropped_commands: %zu\n",
                static_cast<unsigned long long>(cfg.seed), ini::format_double(cfg.duration_s).c_str(),
                trace.sensor_log.size(), trace.frames.size(), trace.commands.size(), dropped);
  out += buf;
  if (!trace.sensor_log.empty()) {
    double lo = 100.0, hi = 0.0;
    for (const auto& e : trace.sensor_log) {
      lo = std::min(lo, e.rh_true);
      hi = std::max(hi, e.rh_true);
    }
    const auto series = true_rh_series(trace);
    const auto n = negotiation_report(series);
    std::snprintf(buf, sizeof buf,
                  "rh_min: %.4f\nrh_max: %.4f\nfinal_opening_pct: %d\noccupancy_human: %.4f\noccupancy_plant: "
                  "%.4f\ncontested_time: %.4f\n",
                  lo, hi, trace.frames.empty() ? cfg.controller.initial_opening : trace.frames.back().opening_pct,
                  n.occupancy_human, n.occupancy_plant, n.contested_time);
    out += buf;
  }
  return out;
}

}  // namespace sloow
