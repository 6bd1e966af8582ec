#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "actuator.hpp"
#include "controller.hpp"
#include "error.hpp"
#include "flora.hpp"
#include "microclimate.hpp"

namespace sloow {

// Someone in the room from start_s to end_s (seconds since scenario start).
struct PresenceInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  double flux = 0.0;  // %RH/s

  friend bool operator==(const PresenceInterval&, const PresenceInterval&) = default;
};

struct DisturbanceSchedule {
  std::vector<PresenceInterval> human_presence;
  double wind_amplitude = 0.003;  // sd of the gust flux, %RH/s
  double wind_gust_s = 60.0;      // how long one gust holds

  friend bool operator==(const DisturbanceSchedule&, const DisturbanceSchedule&) = default;
};

struct ScenarioConfig {
  std::uint64_t seed = 7;
  double duration_s = 8 * 3600.0;
  double start_time_of_day_s = 8 * 3600.0;

  double rh_initial = 40.0;
  double rh_exterior = 40.0;
  double air_exchange_per_s = 0.003;
  double step_s = 1.0;

  std::vector<PlantSpecies> species = species_presets();
  SensorModel sensor;
  ControllerConfig controller;
  double ramp_rate = 2.0;
  CommandChannel channel;
  LightModel light;
  bool constant_time_of_day = false;  // freeze the sun at start_time_of_day_s
  DisturbanceSchedule disturbance;

  double capture_interval_s = 30.0;
  double base_fps = 30.0;

  friend bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    auto sensor_eq = [](const SensorModel& x, const SensorModel& y) {
      return x.plant_weight == y.plant_weight && x.human_weight == y.human_weight &&
             x.wind_weight == y.wind_weight && x.noise_sd == y.noise_sd;
    };
    return a.seed == b.seed && a.duration_s == b.duration_s && a.start_time_of_day_s == b.start_time_of_day_s &&
           a.rh_initial == b.rh_initial && a.rh_exterior == b.rh_exterior &&
           a.air_exchange_per_s == b.air_exchange_per_s && a.step_s == b.step_s && a.species == b.species &&
           sensor_eq(a.sensor, b.sensor) && a.controller == b.controller && a.ramp_rate == b.ramp_rate &&
           a.channel == b.channel && a.light == b.light && a.constant_time_of_day == b.constant_time_of_day &&
           a.disturbance == b.disturbance && a.capture_interval_s == b.capture_interval_s &&
           a.base_fps == b.base_fps;
  }
};

namespace detail {

inline void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

inline bool whole_millis(double s) { return s >= 0.001 && std::abs(s * 1000.0 - std::round(s * 1000.0)) < 1e-6; }

}  // namespace detail

namespace ini {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace ini

inline void validate(const ScenarioConfig& c) {
  using detail::require;
  require(c.duration_s >= 0.0, "scenario.duration_s", "must be >= 0");
  require(c.start_time_of_day_s >= 0.0 && c.start_time_of_day_s < 86400.0, "scenario.start_time_of_day_s",
          "must be in [0,86400)");
  require(c.rh_initial >= 0.0 && c.rh_initial <= 100.0, "microclimate.rh_initial", "must be in [0,100]");
  require(c.rh_exterior >= 0.0 && c.rh_exterior <= 100.0, "microclimate.rh_exterior", "must be in [0,100]");
  require(c.air_exchange_per_s >= 0.0, "microclimate.air_exchange_per_s", "must be >= 0");
  require(detail::whole_millis(c.step_s), "microclimate.step_s", "must be a positive whole number of milliseconds");

  std::set<std::string> names;
  for (const auto& s : c.species) {
    try {
      validate(s);
    } catch (const InputError& e) {
      throw ConfigError("species", e.what());
    }
    require(!s.name.empty() && s.name.find_first_of(",#[]\n") == std::string::npos && ini::trim(s.name) == s.name,
            "species", "species name '" + s.name + "' is empty or contains , # [ ]");
    require(names.insert(s.name).second, "species", "duplicate species '" + s.name + "'");
    for (const auto& m : s.movements)
      require(!m.label.empty() && m.label.find_first_of(",/#\n") == std::string::npos &&
                  ini::trim(m.label) == m.label,
              "species", "movement label '" + m.label + "' is empty or contains , / #");
  }

  for (auto [w, field] : {std::pair{c.sensor.plant_weight, "sensor.plant_weight"},
                          std::pair{c.sensor.human_weight, "sensor.human_weight"},
                          std::pair{c.sensor.wind_weight, "sensor.wind_weight"}})
    require(w >= 0.0 && w <= 2.0, field, "must be in [0,2]");
  require(c.sensor.noise_sd >= 0.0, "sensor.noise_sd", "must be >= 0");

  validate(c.controller);
  require(detail::whole_millis(c.controller.tick_s), "controller.tick_s",
          "must be a positive whole number of milliseconds");
  require(c.ramp_rate > 0.0, "actuator.ramp_rate", "must be > 0");
  validate(c.channel);
  validate(c.light);

  require(c.disturbance.wind_amplitude >= 0.0, "disturbance.wind_amplitude", "must be >= 0");
  require(detail::whole_millis(c.disturbance.wind_gust_s), "disturbance.wind_gust_s",
          "must be a positive whole number of milliseconds");
  for (const auto& p : c.disturbance.human_presence) {
    require(p.start_s >= 0.0 && p.start_s < p.end_s, "disturbance.human_presence", "need 0 <= start < end");
    require(p.flux >= 0.0, "disturbance.human_presence", "flux must be >= 0");
  }

  require(detail::whole_millis(c.capture_interval_s), "timelapse.interval_s",
          "must be a positive whole number of milliseconds");
  require(c.base_fps > 0.0, "timelapse.base_fps", "must be > 0");
}

/// Parses the INI scenario format:
///
///   # comment
///   [section]
///   key = value
///
/// Sections: scenario, microclimate, plants, sensor, controller, actuator,
/// light, disturbance, timelapse, and any number of `[species: <name>]` blocks
/// for inline plant definitions (appended after the `plants.species` presets).
/// Omitted keys keep their defaults. Unknown keys, duplicate keys and duplicate
/// sections are errors.
inline ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig cfg;
  std::map<std::string, std::size_t> field_lines;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::string section;
  std::optional<std::size_t> inline_idx;
  std::vector<PlantSpecies> preset_list = species_presets();
  std::vector<PlantSpecies> inline_list;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') throw ParseError(line_no, "", "CR line endings are not accepted");
    line = ini::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "", "unterminated section header");
      std::string name(ini::trim(line.substr(1, line.size() - 2)));
      if (!seen_sections.insert(name).second) throw ParseError(line_no, name, "duplicate section [" + name + "]");
      inline_idx.reset();
      if (name.rfind("species:", 0) == 0) {
        std::string sp(ini::trim(std::string_view(name).substr(8)));
        if (sp.empty()) throw ParseError(line_no, name, "species section needs a name");
        inline_list.push_back(PlantSpecies{sp, 50.0, 0.0, {}});
        inline_idx = inline_list.size() - 1;
        section = "species";
      } else {
        static const std::set<std::string> known = {"scenario", "microclimate", "plants",      "sensor",   "controller",
                                                    "actuator", "light",        "disturbance", "timelapse"};
        if (!known.count(name)) throw ParseError(line_no, name, "unknown section [" + name + "]");
        section = name;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "", "expected 'key = value'");
    const std::string key(ini::trim(line.substr(0, eq)));
    const std::string_view value = ini::trim(line.substr(eq + 1));
    if (section.empty()) throw ParseError(line_no, key, "key outside of any section");
    PlantSpecies* inline_species = inline_idx ? &inline_list[*inline_idx] : nullptr;
    const std::string field = (inline_species ? "species:" + inline_species->name : section) + "." + key;
    if (!seen_keys.insert(field).second) throw ParseError(line_no, field, "duplicate key");
    field_lines[section + "." + key] = line_no;

    auto num = [&](auto& out) {
      if (!ini::parse_number(value, out)) throw ParseError(line_no, field, "invalid number '" + std::string(value) + "'");
    };
    auto boolean = [&](bool& out) {
      if (value == "true") out = true;
      else if (value == "false") out = false;
      else throw ParseError(line_no, field, "expected true or false");
    };
    auto unknown = [&] { throw ParseError(line_no, field, "unknown key '" + key + "' in [" + section + "]"); };

    if (section == "scenario") {
      if (key == "seed") num(cfg.seed);
      else if (key == "duration_s") num(cfg.duration_s);
      else if (key == "start_time_of_day_s") num(cfg.start_time_of_day_s);
      else unknown();
    } else if (section == "microclimate") {
      if (key == "rh_initial") num(cfg.rh_initial);
      else if (key == "rh_exterior") num(cfg.rh_exterior);
      else if (key == "air_exchange_per_s") num(cfg.air_exchange_per_s);
      else if (key == "step_s") num(cfg.step_s);
      else unknown();
    } else if (section == "plants") {
      if (key != "species") unknown();
      preset_list.clear();
      for (const auto& name : ini::split_list(value)) {
        auto p = preset_by_name(name);
        if (!p) throw ParseError(line_no, field, "unknown species preset '" + name + "'");
        preset_list.push_back(*p);
      }
    } else if (section == "species") {
      if (key == "comfort_rh_lo") num(inline_species->comfort_rh_lo);
      else if (key == "transp_coeff_k") num(inline_species->transp_coeff_k);
      else if (key == "movements") {
        for (const auto& item : ini::split_list(value)) {
          auto parts = ini::split_list(item, '/');
          Movement m;
          if (parts.size() != 3 || parts[0].empty() || !ini::parse_number(parts[1], m.period_s) ||
              !ini::parse_number(parts[2], m.amplitude))
            throw ParseError(line_no, field, "movement '" + item + "' is not label/period_s/amplitude");
          m.label = parts[0];
          inline_species->movements.push_back(std::move(m));
        }
      } else unknown();
    } else if (section == "sensor") {
      if (key == "plant_weight") num(cfg.sensor.plant_weight);
      else if (key == "human_weight") num(cfg.sensor.human_weight);
      else if (key == "wind_weight") num(cfg.sensor.wind_weight);
      else if (key == "noise_sd") num(cfg.sensor.noise_sd);
      else unknown();
    } else if (section == "controller") {
      auto& c = cfg.controller;
      if (key == "tick_s") num(c.tick_s);
      else if (key == "deadband_lo") num(c.deadband_lo);
      else if (key == "deadband_hi") num(c.deadband_hi);
      else if (key == "step_pct") num(c.step_pct);
      else if (key == "clamp_lo") num(c.clamp_lo);
      else if (key == "clamp_hi") num(c.clamp_hi);
      else if (key == "initial_opening") num(c.initial_opening);
      else unknown();
    } else if (section == "actuator") {
      if (key == "ramp_rate") num(cfg.ramp_rate);
      else if (key == "drop_prob") num(cfg.channel.drop_prob);
      else if (key == "delay_s") num(cfg.channel.delay_s);
      else unknown();
    } else if (section == "light") {
      if (key == "transmissivity_closed") num(cfg.light.transmissivity_closed);
      else if (key == "transmissivity_open") num(cfg.light.transmissivity_open);
      else if (key == "sunrise_s") num(cfg.light.sunrise_s);
      else if (key == "sunset_s") num(cfg.light.sunset_s);
      else if (key == "constant_time_of_day") boolean(cfg.constant_time_of_day);
      else unknown();
    } else if (section == "disturbance") {
      auto& d = cfg.disturbance;
      if (key == "wind_amplitude") num(d.wind_amplitude);
      else if (key == "wind_gust_s") num(d.wind_gust_s);
      else if (key == "human_presence") {
        // start:end@flux, comma separated
        for (const auto& item : ini::split_list(value)) {
          PresenceInterval p;
          const auto at = item.find('@');
          const auto dash = item.find(':');
          if (at == std::string::npos || dash == std::string::npos || dash > at ||
              !ini::parse_number(std::string_view(item).substr(0, dash), p.start_s) ||
              !ini::parse_number(std::string_view(item).substr(dash + 1, at - dash - 1), p.end_s) ||
              !ini::parse_number(std::string_view(item).substr(at + 1), p.flux))
            throw ParseError(line_no, field, "presence '" + item + "' is not start:end@flux");
          d.human_presence.push_back(p);
        }
      } else unknown();
    } else if (section == "timelapse") {
      if (key == "interval_s") num(cfg.capture_interval_s);
      else if (key == "base_fps") num(cfg.base_fps);
      else unknown();
    }
    if (nl == text.size()) break;
  }

  cfg.species = std::move(preset_list);
  for (auto& s : inline_list) cfg.species.push_back(std::move(s));

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    auto it = field_lines.find(e.field());
    throw ParseError(it == field_lines.end() ? 0 : it->second, e.field(), e.detail());
  }
  return cfg;
}

// Writes every field explicitly; parse_scenario(serialize_scenario(c)) == c.
inline std::string serialize_scenario(const ScenarioConfig& c) {
  using ini::format_double;
  std::ostringstream o;
  o << "[scenario]\n"
    << "seed = " << c.seed << "\n"
    << "duration_s = " << format_double(c.duration_s) << "\n"
    << "start_time_of_day_s = " << format_double(c.start_time_of_day_s) << "\n\n"
    << "[microclimate]\n"
    << "rh_initial = " << format_double(c.rh_initial) << "\n"
    << "rh_exterior = " << format_double(c.rh_exterior) << "\n"
    << "air_exchange_per_s = " << format_double(c.air_exchange_per_s) << "\n"
    << "step_s = " << format_double(c.step_s) << "\n\n"
    << "[plants]\n"
    << "species =\n\n";
  for (const auto& s : c.species) {
    o << "[species: " << s.name << "]\n"
      << "comfort_rh_lo = " << format_double(s.comfort_rh_lo) << "\n"
      << "transp_coeff_k = " << format_double(s.transp_coeff_k) << "\n"
      << "movements =";
    for (std::size_t i = 0; i < s.movements.size(); ++i) {
      const auto& m = s.movements[i];
      o << (i ? ", " : " ") << m.label << "/" << format_double(m.period_s) << "/" << format_double(m.amplitude);
    }
    o << "\n\n";
  }
  o << "[sensor]\n"
    << "plant_weight = " << format_double(c.sensor.plant_weight) << "\n"
    << "human_weight = " << format_double(c.sensor.human_weight) << "\n"
    << "wind_weight = " << format_double(c.sensor.wind_weight) << "\n"
    << "noise_sd = " << format_double(c.sensor.noise_sd) << "\n\n"
    << "[controller]\n"
    << "tick_s = " << format_double(c.controller.tick_s) << "\n"
    << "deadband_lo = " << format_double(c.controller.deadband_lo) << "\n"
    << "deadband_hi = " << format_double(c.controller.deadband_hi) << "\n"
    << "step_pct = " << c.controller.step_pct << "\n"
    << "clamp_lo = " << c.controller.clamp_lo << "\n"
    << "clamp_hi = " << c.controller.clamp_hi << "\n"
    << "initial_opening = " << c.controller.initial_opening << "\n\n"
    << "[actuator]\n"
    << "ramp_rate = " << format_double(c.ramp_rate) << "\n"
    << "drop_prob = " << format_double(c.channel.drop_prob) << "\n"
    << "delay_s = " << format_double(c.channel.delay_s) << "\n\n"
    << "[light]\n"
    << "transmissivity_closed = " << format_double(c.light.transmissivity_closed) << "\n"
    << "transmissivity_open = " << format_double(c.light.transmissivity_open) << "\n"
    << "sunrise_s = " << format_double(c.light.sunrise_s) << "\n"
    << "sunset_s = " << format_double(c.light.sunset_s) << "\n"
    << "constant_time_of_day = " << (c.constant_time_of_day ? "true" : "false") << "\n\n"
    << "[disturbance]\n"
    << "wind_amplitude = " << format_double(c.disturbance.wind_amplitude) << "\n"
    << "wind_gust_s = " << format_double(c.disturbance.wind_gust_s) << "\n"
    << "human_presence =";
  for (std::size_t i = 0; i < c.disturbance.human_presence.size(); ++i) {
    const auto& p = c.disturbance.human_presence[i];
    o << (i ? ", " : " ") << format_double(p.start_s) << ":" << format_double(p.end_s) << "@" << format_double(p.flux);
  }
  o << "\n\n"
    << "[timelapse]\n"
    << "interval_s = " << format_double(c.capture_interval_s) << "\n"
    << "base_fps = " << format_double(c.base_fps) << "\n";
  return o.str();
}

}  // namespace sloow
