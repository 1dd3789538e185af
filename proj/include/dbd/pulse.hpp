#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dbd {

/// Resonance offset of the first-order double Bragg transition, 4 w_rec.
inline constexpr double kBraggResonance = 4.0;

/// Above this amplitude (in w_rec) the few-level models leave the quasi-Bragg
/// regime and results should be treated with care.
inline constexpr double kQuasiBraggLimit = 8.0;

inline constexpr double kDefaultDetuningBound = 4.0;

struct GaussianPulse {
  double omega_r = 0.0;  // peak two-photon Rabi frequency
  double tau = 1.0;      // temporal width
  double t0 = 0.0;       // temporal center
};

struct BoxPulse {
  double omega = 0.0;
  double tau = 1.0;  // duration, pulse is on for t in [0, tau)
};

class PulseEnvelope {
 public:
  PulseEnvelope(GaussianPulse g);
  PulseEnvelope(BoxPulse b);

  static PulseEnvelope gaussian(double omega_r, double tau, double t0 = 0.0) {
    return PulseEnvelope(GaussianPulse{omega_r, tau, t0});
  }
  static PulseEnvelope box(double omega, double tau) { return PulseEnvelope(BoxPulse{omega, tau}); }

  double operator()(double t) const noexcept;

  bool is_gaussian() const noexcept { return std::holds_alternative<GaussianPulse>(shape_); }
  bool is_box() const noexcept { return std::holds_alternative<BoxPulse>(shape_); }
  const GaussianPulse& as_gaussian() const { return std::get<GaussianPulse>(shape_); }
  const BoxPulse& as_box() const { return std::get<BoxPulse>(shape_); }

  double peak() const noexcept;
  double width() const noexcept;

  /// Default integration window: [t0 - 5 tau, t0 + 5 tau] for Gaussians with
  /// t0 <= 0, [0, 2 t0] for Gaussians centred at t0 > 0, [0, tau] for boxes.
  std::pair<double, double> default_window() const noexcept;

 private:
  std::variant<GaussianPulse, BoxPulse> shape_;
};

double envelope_value(const PulseEnvelope& pulse, double t) noexcept;

struct ConstantDetuning {
  double value = 0.0;
};

/// delta(t) = slope * (t - t_zero).
struct LinearDetuning {
  double slope = 0.0;
  double t_zero = 0.0;
};

struct Knot {
  double t;
  double value;
};

struct PiecewiseLinearDetuning {
  std::vector<Knot> knots;
};

class DetuningProfile {
 public:
  using Shape = std::variant<ConstantDetuning, LinearDetuning, PiecewiseLinearDetuning>;

  DetuningProfile() : DetuningProfile(ConstantDetuning{0.0}) {}
  explicit DetuningProfile(Shape shape, double bound = kDefaultDetuningBound);

  static DetuningProfile constant(double value, double bound = kDefaultDetuningBound) {
    return DetuningProfile(ConstantDetuning{value}, bound);
  }
  static DetuningProfile linear(double slope, double t_zero, double bound = kDefaultDetuningBound) {
    return DetuningProfile(LinearDetuning{slope, t_zero}, bound);
  }
  static DetuningProfile piecewise(std::vector<Knot> knots, double bound = kDefaultDetuningBound) {
    return DetuningProfile(PiecewiseLinearDetuning{std::move(knots)}, bound);
  }

  /// Evaluates the profile, clamped to [-bound, bound].
  double operator()(double t) const noexcept;

  double bound() const noexcept { return bound_; }
  bool is_constant() const noexcept { return std::holds_alternative<ConstantDetuning>(shape_); }
  const Shape& shape() const noexcept { return shape_; }

 private:
  Shape shape_;
  double bound_;
};

double detuning_value(const DetuningProfile& profile, double t) noexcept;

struct PolarizationError {
  double value = 0.0;

  PolarizationError() = default;
  explicit PolarizationError(double eps);
};

/// Lattice coupling factor C(t) = cos[(4 + delta(t)) t] + eps. The phase is
/// the literal product of the instantaneous frequency difference and t.
double coupling_factor(double t, PolarizationError eps, const DetuningProfile& profile) noexcept;

/// Messages for amplitudes outside the quasi-Bragg regime; empty when fine.
std::vector<std::string> quasi_bragg_warnings(const PulseEnvelope& pulse, const DetuningProfile& profile);

// JSON document form: {"pulse": {...}, "detuning": {...}}.
nlohmann::json to_json(const PulseEnvelope& pulse);
nlohmann::json to_json(const DetuningProfile& profile);
PulseEnvelope pulse_from_json(const nlohmann::json& j);
DetuningProfile detuning_from_json(const nlohmann::json& j);

}  // namespace dbd
