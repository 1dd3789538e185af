#include "dbd/units.hpp"

#include <numbers>

#include "dbd/error.hpp"

namespace dbd {

double UnitSystem::recoil_frequency_si() const {
  if (!si) throw Error(ErrorCode::MissingSiContext, "no wavelength/mass given for SI conversion");
  if (!(si->wavelength_m > 0.0) || !(si->mass_kg > 0.0))
    throw Error(ErrorCode::InvalidArgument, "wavelength and mass must be positive");
  const double k = 2.0 * std::numbers::pi / si->wavelength_m;
  return codata::hbar * k * k / (2.0 * si->mass_kg);
}

double si_convert(const UnitSystem& units, double value, Quantity quantity, Direction direction) {
  const double w = units.recoil_frequency_si();
  // time_si = t / w ; freq_si = f * w
  const bool to_si = direction == Direction::ToSi;
  if (quantity == Quantity::Time) return to_si ? value / w : value * w;
  return to_si ? value * w : value / w;
}

}  // namespace dbd
