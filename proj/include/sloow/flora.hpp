#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace sloow {

// A slow periodic plant (or curtain) motion, as seen by the time-lapse camera.
struct Movement {
  std::string label;
  double period_s = 1.0;
  double amplitude = 1.0;

  friend bool operator==(const Movement&, const Movement&) = default;
};

struct PlantSpecies {
  std::string name;
  double comfort_rh_lo = 50.0;
  double transp_coeff_k = 0.0;  // %RH/s at full light and rh = 0
  std::vector<Movement> movements;

  friend bool operator==(const PlantSpecies&, const PlantSpecies&) = default;
};

inline void validate(const Movement& m) {
  if (!(m.period_s > 0.0)) throw InputError("movement '" + m.label + "': period_s must be > 0");
  if (!(m.amplitude >= 0.0 && m.amplitude <= 1.0))
    throw InputError("movement '" + m.label + "': amplitude must be in [0,1]");
}

inline void validate(const PlantSpecies& s) {
  if (!(s.transp_coeff_k >= 0.0)) throw InputError("species '" + s.name + "': transp_coeff_k must be >= 0");
  if (!(s.comfort_rh_lo >= 0.0 && s.comfort_rh_lo <= 100.0))
    throw InputError("species '" + s.name + "': comfort_rh_lo must be in [0,100]");
  for (const auto& m : s.movements) validate(m);
}

/// Dryness-gated linear transpiration: k * light * (1 - rh/100).
///
/// The (1 - rh/100) factor stands in for the vapour-pressure deficit, so the
/// flux vanishes in saturated air and with no light.
inline double transpiration_flux(const PlantSpecies& species, double light_frac, double rh) {
  if (!(light_frac >= 0.0 && light_frac <= 1.0)) throw InputError("transpiration_flux: light_frac outside [0,1]");
  if (!(rh >= 0.0 && rh <= 100.0)) throw InputError("transpiration_flux: rh outside [0,100]");
  return species.transp_coeff_k * light_frac * (1.0 - rh / 100.0);
}

inline double movement_position(const Movement& movement, double t) {
  if (!(t >= 0.0)) throw InputError("movement_position: t must be >= 0");
  // Reduce first so that whole periods land exactly on zero phase.
  const double phase = std::fmod(t, movement.period_s) / movement.period_s;
  return movement.amplitude * std::sin(2.0 * std::numbers::pi * phase);
}

namespace presets {

inline constexpr double clivia_leaf_flap_period_s = 14400.0;
inline constexpr double monstera_stem_nod_period_s = 36000.0;

inline PlantSpecies monstera_deliciosa() {
  return {"Monstera Deliciosa", 50.0, 0.004, {{"stem-nod", monstera_stem_nod_period_s, 1.0}}};
}

inline PlantSpecies clivia_miniata() {
  return {"Clivia Miniata", 40.0, 0.003, {{"leaf-flap", clivia_leaf_flap_period_s, 1.0}}};
}

inline PlantSpecies jasmine_sambac() { return {"Jasmine Sambac", 50.0, 0.003, {}}; }

}  // namespace presets

inline std::vector<PlantSpecies> species_presets() {
  return {presets::monstera_deliciosa(), presets::clivia_miniata(), presets::jasmine_sambac()};
}

// Case-sensitive lookup by full species name.
inline std::optional<PlantSpecies> preset_by_name(std::string_view name) {
  for (auto& p : species_presets())
    if (p.name == name) return p;
  return std::nullopt;
}

}  // namespace sloow
