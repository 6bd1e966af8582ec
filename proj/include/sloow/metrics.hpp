#pragma once

#include <span>
#include <utility>

#include "error.hpp"

namespace sloow {

struct RhSample {
  double t;
  double rh;
};

struct Band {
  double lo;
  double hi;
};

inline constexpr Band human_comfort_band{30.0, 50.0};

namespace detail {

inline void check_series(std::span<const RhSample> series) {
  if (series.empty()) throw InputError("rh series is empty");
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i].t < series[i - 1].t) throw InputError("rh series is not time-sorted");
}

// Calls f(rh, weight) for each sample. Each sample holds until the next one;
// a series spanning zero time weights its samples equally.
template <typename F>
void for_each_weighted(std::span<const RhSample> series, F&& f) {
  const double span = series.back().t - series.front().t;
  if (span <= 0.0) {
    for (const auto& s : series) f(s.rh, 1.0 / static_cast<double>(series.size()));
    return;
  }
  for (std::size_t i = 0; i + 1 < series.size(); ++i) f(series[i].rh, (series[i + 1].t - series[i].t) / span);
}

}  // namespace detail

// Time-weighted fraction of the series with lo <= rh <= hi.
inline double band_occupancy(std::span<const RhSample> series, Band band) {
  detail::check_series(series);
  double inside = 0.0;
  detail::for_each_weighted(series, [&](double rh, double w) {
    if (rh >= band.lo && rh <= band.hi) inside += w;
  });
  return inside;
}

struct NegotiationReport {
  double occupancy_human = 0.0;  // rh within the human comfort band
  double occupancy_plant = 0.0;  // rh above the plant comfort floor
  double contested_time = 0.0;   // neither party comfortable
};

/// Splits the trace between human comfort, plant comfort, and neither.
/// The plant floor is exclusive, so with the default bands ([30,50] and
/// above 50) the three fractions partition the time axis.
inline NegotiationReport negotiation_report(std::span<const RhSample> series, Band human_band = human_comfort_band,
                                            double plant_comfort_lo = 50.0) {
  detail::check_series(series);
  NegotiationReport r;
  detail::for_each_weighted(series, [&](double rh, double w) {
    const bool human = rh >= human_band.lo && rh <= human_band.hi;
    const bool plant = rh > plant_comfort_lo;
    if (human) r.occupancy_human += w;
    if (plant) r.occupancy_plant += w;
    if (!human && !plant) r.contested_time += w;
  });
  return r;
}

}  // namespace sloow
