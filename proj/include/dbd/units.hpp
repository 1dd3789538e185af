#pragma once

#include <optional>

namespace dbd {

// All in-process quantities use natural units: frequencies in units of the
// single-photon recoil frequency w_rec = hbar k_L^2 / (2 m), times in 1/w_rec,
// momenta in hbar k_L. SI values only appear at the conversion boundary.

namespace codata {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
}  // namespace codata

struct SiContext {
  double wavelength_m = 780.1e-9;
  double mass_kg = 86.909 * codata::atomic_mass_unit;
};

struct UnitSystem {
  std::optional<SiContext> si;

  static UnitSystem rubidium87() { return UnitSystem{SiContext{}}; }

  /// w_rec in rad/s. Throws MissingSiContext without an SI context.
  double recoil_frequency_si() const;
};

enum class Quantity { Time, Frequency };
enum class Direction { ToSi, ToNatural };

double si_convert(const UnitSystem& units, double value, Quantity quantity, Direction direction);

}  // namespace dbd
