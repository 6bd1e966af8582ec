#pragma once

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bridge/drive.hpp"
#include "bridge/server.hpp"
#include "metrics.hpp"
#include "scenario.hpp"
#include "simulation.hpp"
#include "timelapse.hpp"

namespace sloow::cli {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << data;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline ScenarioConfig load_scenario(const std::string& path) {
  return path.empty() ? ScenarioConfig{} : parse_scenario(read_file(path));
}

struct RunOutputs {
  std::filesystem::path trace, frames, summary;
};

inline RunOutputs cmd_run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create output directory '" + out_dir.string() + "'");
  const auto trace = run_scenario(cfg);
  RunOutputs paths{out_dir / "trace.csv", out_dir / "frames.csv", out_dir / "summary.txt"};
  write_file(paths.trace, trace_csv(trace));
  write_file(paths.frames, frame_csv(trace.frames));
  write_file(paths.summary, summary_text(cfg, trace));
  return paths;
}

/// Reads a frame CSV (t_s,rh_true,opening_pct,light_frac,<motions...>).
inline std::vector<FrameEvent> parse_frame_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("frame CSV is empty");
  auto header = ini::split_list(line);
  static const std::vector<std::string> required = {"t_s", "rh_true", "opening_pct", "light_frac"};
  if (header.size() < required.size() || !std::equal(required.begin(), required.end(), header.begin()))
    throw InputError("frame CSV header must start with t_s,rh_true,opening_pct,light_frac");

  std::vector<FrameEvent> frames;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto cells = ini::split_list(line);
    if (cells.size() != header.size())
      throw InputError("frame CSV line " + std::to_string(n) + ": expected " + std::to_string(header.size()) +
                       " columns");
    FrameEvent f;
    auto num = [&](const std::string& s, double& v) {
      if (!ini::parse_number(s, v)) throw InputError("frame CSV line " + std::to_string(n) + ": bad number '" + s + "'");
    };
    double opening = 0;
    num(cells[0], f.t);
    num(cells[1], f.rh_true);
    num(cells[2], opening);
    num(cells[3], f.light_frac);
    f.opening_pct = static_cast<int>(std::lround(opening));
    f.rh_read = f.rh_true;
    for (std::size_t i = required.size(); i < cells.size(); ++i) num(cells[i], f.motions[header[i]]);
    frames.push_back(std::move(f));
  }
  if (frames.empty()) throw InputError("frame CSV has no rows");
  return frames;
}

inline std::string cmd_analyze(const std::vector<FrameEvent>& frames, const std::vector<double>& speeds,
                               double base_fps, double plant_comfort_lo = 50.0) {
  PlaybackSpec base;
  base.base_fps = base_fps;
  base.capture_interval_s = frames.size() > 1 ? frames[1].t - frames[0].t : 30.0;
  if (!(base.capture_interval_s > 0)) throw InputError("frames are not time-sorted");

  std::ostringstream o;
  o << "frames: " << frames.size() << "\ncapture_interval_s: " << ini::format_double(base.capture_interval_s)
    << "\nbase_fps: " << ini::format_double(base_fps) << "\n\n";
  const auto rows = analyze_motions(frames, speeds, base);
  o << perceptibility_table(rows, speeds, base) << "\n";

  std::vector<RhSample> series;
  for (const auto& f : frames) series.push_back({f.t, f.rh_true});
  const auto n = negotiation_report(series, human_comfort_band, plant_comfort_lo);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "negotiation (human [30,50], plant > %g)\noccupancy_human: %.4f\noccupancy_plant: %.4f\ncontested_time: "
                "%.4f\n",
                plant_comfort_lo, n.occupancy_human, n.occupancy_plant, n.contested_time);
  o << buf;
  return o.str();
}

inline std::string cmd_presets() {
  std::ostringstream o;
  o << "species:\n";
  for (const auto& s : species_presets()) {
    o << "  " << s.name << ": comfort_rh_lo=" << ini::format_double(s.comfort_rh_lo)
      << " transp_coeff_k=" << ini::format_double(s.transp_coeff_k);
    for (const auto& m : s.movements)
      o << " " << m.label << "=" << ini::format_double(m.period_s) << "s";
    o << "\n";
  }
  o << "  curtain: sway=" << ini::format_double(curtain_sway_period_s) << "s\n";
  o << "interval_presets_s:";
  for (double v : interval_presets()) o << " " << ini::format_double(v);
  o << "\ninstruction_table_pct:";
  for (int p : instruction_table(ControllerConfig{})) o << " " << p;
  o << "\n";
  return o.str();
}

inline std::atomic<bool>& stop_requested() {
  static std::atomic<bool> flag = false;
  return flag;
}

inline std::vector<double> parse_speeds(const std::string& text) {
  std::vector<double> speeds;
  for (const auto& item : ini::split_list(text)) {
    double v = 0;
    if (!ini::parse_number(item, v) || !(v > 0)) throw InputError("--speeds: bad value '" + item + "'");
    speeds.push_back(v);
  }
  if (speeds.empty()) throw InputError("--speeds: empty list");
  return speeds;
}

/// Entry point shared by the `sloow` binary and the tests. `args` excludes the
/// program name. Data goes to `out`, diagnostics to `err`; returns the exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop humidity/curtain simulator, time-lapse analysis and curtain device bridge", "sloow"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", frames_path, endpoint_text = "127.0.0.1:7070", sensor_path,
                             speeds_text = "1,3,5";
  std::optional<std::uint64_t> seed;
  double fps = 30.0, plant_lo = 50.0, tick = 25.0, drop_prob = 0.0;
  int initial = 70;
  bool real_time = false;

  auto* run = app.add_subcommand("run", "simulate a scenario and write trace.csv, frames.csv, summary.txt");
  run->add_option("scenario", scenario_path, "scenario INI file (defaults when omitted)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the scenario seed");

  auto* analyze = app.add_subcommand("analyze", "perceptibility and negotiation report for a frame CSV");
  analyze->add_option("frames", frames_path, "frames.csv from `run`")->required();
  analyze->add_option("--speeds", speeds_text, "playback speeds, comma separated");
  analyze->add_option("--fps", fps, "playback frame rate");
  analyze->add_option("--plant-comfort", plant_lo, "plant comfort floor, %RH");

  auto* presets = app.add_subcommand("presets", "list species, camera intervals and the instruction table");

  auto* serve = app.add_subcommand("serve-device", "serve a fake curtain over the line protocol");
  serve->add_option("--endpoint", endpoint_text, "host:port to listen on");
  serve->add_option("--initial", initial, "initial opening, %")->check(CLI::Range(0, 100));
  serve->add_option("--drop-prob", drop_prob, "probability a SET is lost")->check(CLI::Range(0.0, 1.0));
  serve->add_option("--seed", seed, "seed for the loss model");

  auto* drv = app.add_subcommand("drive", "run the controller against a networked curtain");
  drv->add_option("--endpoint", endpoint_text, "device host:port");
  drv->add_option("--sensor", sensor_path, "file with one humidity reading per line")->required();
  drv->add_option("--scenario", scenario_path, "scenario INI whose [controller] section is used");
  drv->add_option("--tick", tick, "seconds per tick");
  drv->add_flag("--real-time", real_time, "pace ticks on the wall clock");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*run) {
      auto cfg = load_scenario(scenario_path);
      if (seed) cfg.seed = *seed;
      const auto paths = cmd_run(cfg, out_dir);
      out << paths.trace.string() << "\n" << paths.frames.string() << "\n" << paths.summary.string() << "\n";
    } else if (*analyze) {
      out << cmd_analyze(parse_frame_csv(read_file(frames_path)), parse_speeds(speeds_text), fps, plant_lo);
    } else if (*presets) {
      out << cmd_presets();
    } else if (*serve) {
      CurtainState initial_state{initial, initial, 2.0, 0.0};
      bridge::DeviceServer server(initial_state, bridge::Endpoint::parse(endpoint_text),
                                  CommandChannel{.drop_prob = drop_prob, .delay_s = 0.0}, seed.value_or(0));
      out << "listening on " << bridge::Endpoint::parse(endpoint_text).host << ":" << server.port() << std::endl;
      stop_requested() = false;
      auto handler = [](int) { stop_requested() = true; };
      std::signal(SIGINT, handler);
      std::signal(SIGTERM, handler);
      while (!stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
      server.stop();
    } else if (*drv) {
      const auto cfg = load_scenario(scenario_path);
      bridge::ScriptedSensor sensor(bridge::load_readings(sensor_path));
      bridge::DriveOptions opts;
      opts.tick_s = tick;
      opts.real_time = real_time;
      out << bridge::drive_log_csv(bridge::drive(cfg.controller, sensor, bridge::Endpoint::parse(endpoint_text), opts));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sloow::cli
