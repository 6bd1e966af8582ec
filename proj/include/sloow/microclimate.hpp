#pragma once

#include <algorithm>
#include <cmath>

#include "random.hpp"

namespace sloow {

struct MicroclimateState {
  double rh_percent = 40.0;
  double rh_exterior = 40.0;
  double air_exchange_per_s = 0.003;
};

// Humidity fluxes in %RH/s, one per kind of agent sharing the sill.
struct FluxSet {
  double plant_flux = 0.0;
  double human_flux = 0.0;
  double wind_flux = 0.0;

  double total() const noexcept { return plant_flux + human_flux + wind_flux; }

  friend FluxSet operator+(const FluxSet& a, const FluxSet& b) noexcept {
    return {a.plant_flux + b.plant_flux, a.human_flux + b.human_flux, a.wind_flux + b.wind_flux};
  }
};

// How the sensor sees the room. A placement weight above 1 means the sensor
// sits closer to that source than the room average (e.g. among the pots).
struct SensorModel {
  static constexpr double resolution = 0.01;
  static constexpr double bias_window_s = 25.0;

  double plant_weight = 1.0;
  double human_weight = 1.0;
  double wind_weight = 1.0;
  double noise_sd = 0.02;
};

inline double clamp_rh(double rh) noexcept { return std::clamp(rh, 0.0, 100.0); }

// Explicit Euler step of the first-order exchange model.
inline MicroclimateState step_rh(MicroclimateState state, const FluxSet& fluxes, double dt) noexcept {
  const double exchange = state.air_exchange_per_s * (state.rh_exterior - state.rh_percent);
  state.rh_percent = clamp_rh(state.rh_percent + dt * (fluxes.total() + exchange));
  return state;
}

// Rounds to the 0.01 %RH grid, ties to even.
inline double quantize_rh(double rh) noexcept {
  return std::nearbyint(rh * 100.0) / 100.0;
}

inline double sensor_bias(const SensorModel& sensor, const FluxSet& fluxes) noexcept {
  return ((sensor.plant_weight - 1.0) * fluxes.plant_flux + (sensor.human_weight - 1.0) * fluxes.human_flux +
          (sensor.wind_weight - 1.0) * fluxes.wind_flux) *
         SensorModel::bias_window_s;
}

// Reading with an explicit noise sample; the stochastic overload draws it.
inline double sensor_read_with_noise(const MicroclimateState& state, const SensorModel& sensor,
                                     const FluxSet& fluxes, double noise) noexcept {
  return clamp_rh(quantize_rh(state.rh_percent + sensor_bias(sensor, fluxes) + noise));
}

inline double sensor_read(const MicroclimateState& state, const SensorModel& sensor, const FluxSet& fluxes,
                          RandomStream& rng) {
  const double noise = sensor.noise_sd > 0.0 ? sensor.noise_sd * rng.gaussian() : 0.0;
  return sensor_read_with_noise(state, sensor, fluxes, noise);
}

}  // namespace sloow
