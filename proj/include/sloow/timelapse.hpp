#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "scheduler.hpp"

namespace sloow {

struct FrameEvent {
  double t = 0.0;
  double rh_true = 0.0;
  double rh_read = 0.0;
  int opening_pct = 0;
  double light_frac = 0.0;
  std::map<std::string, double> motions;  // label -> displacement

  friend bool operator==(const FrameEvent&, const FrameEvent&) = default;
};

struct PlaybackSpec {
  double capture_interval_s = 30.0;
  double base_fps = 30.0;
  double speed_multiplier = 1.0;

  // Real seconds per playback second.
  double compression() const noexcept { return capture_interval_s * base_fps * speed_multiplier; }
};

// Apparent periods a viewer registers as motion: faster reads as flicker,
// slower as stillness.
struct PerceptibilityBand {
  double min_apparent_period_s = 0.5;
  double max_apparent_period_s = 10.0;

  bool contains(double apparent_s) const noexcept {
    return apparent_s >= min_apparent_period_s && apparent_s <= max_apparent_period_s;
  }
};

/// Capture instants 0, interval, 2*interval, ... up to and including duration.
/// Computed on the millisecond grid so counts are exact.
inline std::vector<double> capture_schedule(double duration_s, double interval_s = 30.0) {
  if (!(interval_s > 0.0)) throw InputError("capture_schedule: interval must be > 0");
  if (!(duration_s >= 0.0)) throw InputError("capture_schedule: duration must be >= 0");
  const Millis interval = to_millis(interval_s);
  if (interval <= 0) throw InputError("capture_schedule: interval below 1 ms");
  const Millis duration = to_millis(duration_s);
  const Millis count = duration / interval + 1;
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count));
  for (Millis k = 0; k < count; ++k) times.push_back(to_seconds(k * interval));
  return times;
}

// The camera's interval menu, half a second to one hour.
inline std::vector<double> interval_presets() {
  return {0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 60.0, 120.0, 300.0, 1800.0, 3600.0};
}

inline double apparent_period(double real_period_s, const PlaybackSpec& spec) {
  if (!(real_period_s > 0.0)) throw InputError("apparent_period: period must be > 0");
  return real_period_s / spec.compression();
}

inline std::optional<double> first_perceptible_speed(double real_period_s, const PerceptibilityBand& band,
                                                     std::span<const double> speeds,
                                                     PlaybackSpec spec = {}) {
  for (std::size_t i = 1; i < speeds.size(); ++i)
    if (!(speeds[i] > speeds[i - 1])) throw InputError("first_perceptible_speed: speeds must be strictly increasing");
  for (double s : speeds) {
    spec.speed_multiplier = s;
    if (band.contains(apparent_period(real_period_s, spec))) return s;
  }
  return std::nullopt;
}

inline std::optional<double> first_perceptible_speed(double real_period_s, const PerceptibilityBand& band = {}) {
  static constexpr double kDefaultSpeeds[] = {1.0, 3.0, 5.0};
  return first_perceptible_speed(real_period_s, band, kDefaultSpeeds);
}

struct PlaybackFrame {
  double playback_t;
  FrameEvent frame;
};

// Retimes every frame onto the playback clock; nothing is dropped.
inline std::vector<PlaybackFrame> resample(std::span<const FrameEvent> frames, const PlaybackSpec& spec) {
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i].t < frames[i - 1].t) throw InputError("resample: frames are not time-sorted");
  const double rate = spec.base_fps * spec.speed_multiplier;
  if (!(rate > 0.0)) throw InputError("resample: base_fps * speed must be > 0");
  std::vector<PlaybackFrame> out;
  out.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) out.push_back({static_cast<double>(k) / rate, frames[k]});
  return out;
}

inline double playback_duration(std::size_t frame_count, const PlaybackSpec& spec) {
  return frame_count < 2 ? 0.0 : static_cast<double>(frame_count - 1) / (spec.base_fps * spec.speed_multiplier);
}

namespace detail {

// Residual sum of squares of the best a*sin(wt) + b*cos(wt) fit.
inline double sinusoid_residual(std::span<const double> t, std::span<const double> x, double omega) {
  double ss = 0, sc = 0, cc = 0, xs = 0, xc = 0, xx = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = std::sin(omega * t[i]);
    const double c = std::cos(omega * t[i]);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    xs += x[i] * s;
    xc += x[i] * c;
    xx += x[i] * x[i];
  }
  const double det = ss * cc - sc * sc;
  if (std::abs(det) < 1e-12 * (ss * cc + 1e-300)) {
    // Nearly collinear basis (very long periods); fall back to one regressor.
    const double a = ss > cc ? xs / ss : xc / cc;
    return xx - a * (ss > cc ? xs : xc);
  }
  const double a = (xs * cc - xc * sc) / det;
  const double b = (xc * ss - xs * sc) / det;
  return xx - a * xs - b * xc;
}

}  // namespace detail

struct PeriodEstimate {
  double period_s;
  double r_squared;  // fraction of signal energy explained by the fit
};

/// Estimates the period of a zero-mean periodic motion sampled at `t`.
///
/// Least-squares sinusoid fit over a log-spaced period grid from the Nyquist
/// limit to twenty times the record span, refined by golden-section search.
/// Works on records shorter than one period. Returns nullopt for a still
/// (all-zero) or too-short series.
inline std::optional<PeriodEstimate> estimate_period(std::span<const double> t, std::span<const double> x) {
  if (t.size() != x.size()) throw InputError("estimate_period: size mismatch");
  if (t.size() < 3) return std::nullopt;
  double energy = 0;
  for (double v : x) energy += v * v;
  if (energy <= 1e-18) return std::nullopt;

  double min_dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] <= t[i - 1]) throw InputError("estimate_period: times must be strictly increasing");
    min_dt = std::min(min_dt, t[i] - t[i - 1]);
  }
  const double span = t.back() - t.front();
  const double lo = std::log(2.0 * min_dt);
  const double hi = std::log(20.0 * span);
  if (!(hi > lo)) return std::nullopt;

  auto cost = [&](double log_p) { return detail::sinusoid_residual(t, x, 2.0 * std::numbers::pi / std::exp(log_p)); };

  constexpr int grid = 4000;
  const double h = (hi - lo) / grid;
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double c = cost(lo + h * i);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }

  double a = lo + h * std::max(best - 1, 0);
  double b = lo + h * std::min(best + 1, grid);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = b - inv_phi * (b - a);
  double c2 = a + inv_phi * (b - a);
  double f1 = cost(c1), f2 = cost(c2);
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - inv_phi * (b - a);
      f1 = cost(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + inv_phi * (b - a);
      f2 = cost(c2);
    }
  }
  const double log_p = (a + b) / 2.0;
  const double residual = std::max(cost(log_p), 0.0);
  return PeriodEstimate{std::exp(log_p), 1.0 - residual / energy};
}

struct MotionPerceptibility {
  std::string label;
  std::optional<double> period_s;  // absent: no motion detected
  std::optional<double> speed;     // absent: imperceptible at every speed offered
};

inline std::vector<MotionPerceptibility> analyze_motions(std::span<const FrameEvent> frames,
                                                         std::span<const double> speeds, const PlaybackSpec& base,
                                                         const PerceptibilityBand& band = {}) {
  std::vector<std::string> labels;
  if (!frames.empty())
    for (const auto& [label, _] : frames.front().motions) labels.push_back(label);
  std::vector<double> t;
  for (const auto& f : frames) t.push_back(f.t);

  std::vector<MotionPerceptibility> out;
  for (const auto& label : labels) {
    std::vector<double> x;
    for (const auto& f : frames) {
      auto it = f.motions.find(label);
      x.push_back(it == f.motions.end() ? 0.0 : it->second);
    }
    MotionPerceptibility m{label, std::nullopt, std::nullopt};
    if (auto est = estimate_period(t, x)) {
      m.period_s = est->period_s;
      m.speed = first_perceptible_speed(est->period_s, band, speeds, base);
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline std::string format_speed(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gx", s);
  return buf;
}

// Plain-text table: one row per motion with its period and first perceptible speed.
inline std::string perceptibility_table(std::span<const MotionPerceptibility> rows, std::span<const double> speeds,
                                        const PlaybackSpec& base) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-32s %12s", "motion", "period_s");
  out += buf;
  for (double s : speeds) {
    std::snprintf(buf, sizeof buf, " %10s", ("@" + format_speed(s)).c_str());
    out += buf;
  }
  out += "  first_perceptible\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-32s %12s", r.label.c_str(),
                  r.period_s ? std::to_string(static_cast<long long>(std::llround(*r.period_s))).c_str() : "-");
    out += buf;
    for (double s : speeds) {
      if (r.period_s) {
        PlaybackSpec spec = base;
        spec.speed_multiplier = s;
        std::snprintf(buf, sizeof buf, " %10.3f", apparent_period(*r.period_s, spec));
      } else {
        std::snprintf(buf, sizeof buf, " %10s", "-");
      }
      out += buf;
    }
    out += "  ";
    out += r.speed ? format_speed(*r.speed) : std::string("imperceptible");
    out += '\n';
  }
  return out;
}

}  // namespace sloow
