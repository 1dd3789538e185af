#include "dbd/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbd/error.hpp"

namespace dbd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_pulse(double amplitude, double tau) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw Error(ErrorCode::InvalidArgument, "pulse amplitude must be finite and >= 0");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw Error(ErrorCode::InvalidArgument, "pulse width must be finite and > 0");
}

}  // namespace

PulseEnvelope::PulseEnvelope(GaussianPulse g) : shape_(g) {
  check_pulse(g.omega_r, g.tau);
  if (!std::isfinite(g.t0)) throw Error(ErrorCode::InvalidArgument, "pulse center must be finite");
}

PulseEnvelope::PulseEnvelope(BoxPulse b) : shape_(b) { check_pulse(b.omega, b.tau); }

double PulseEnvelope::operator()(double t) const noexcept {
  return std::visit(overloaded{
                        [t](const GaussianPulse& g) {
                          const double s = (t - g.t0) / g.tau;
                          return g.omega_r * std::exp(-0.5 * s * s);
                        },
                        [t](const BoxPulse& b) { return (t >= 0.0 && t < b.tau) ? b.omega : 0.0; },
                    },
                    shape_);
}

double PulseEnvelope::peak() const noexcept {
  return std::visit(overloaded{[](const GaussianPulse& g) { return g.omega_r; },
                               [](const BoxPulse& b) { return b.omega; }},
                    shape_);
}

double PulseEnvelope::width() const noexcept {
  return std::visit(overloaded{[](const GaussianPulse& g) { return g.tau; },
                               [](const BoxPulse& b) { return b.tau; }},
                    shape_);
}

std::pair<double, double> PulseEnvelope::default_window() const noexcept {
  return std::visit(overloaded{
                        [](const GaussianPulse& g) -> std::pair<double, double> {
                          if (g.t0 > 0.0) return {0.0, 2.0 * g.t0};
                          return {g.t0 - 5.0 * g.tau, g.t0 + 5.0 * g.tau};
                        },
                        [](const BoxPulse& b) -> std::pair<double, double> { return {0.0, b.tau}; },
                    },
                    shape_);
}

double envelope_value(const PulseEnvelope& pulse, double t) noexcept { return pulse(t); }

DetuningProfile::DetuningProfile(Shape shape, double bound) : shape_(std::move(shape)), bound_(bound) {
  if (!(bound_ >= 0.0)) throw Error(ErrorCode::InvalidArgument, "detuning bound must be >= 0");
  if (const auto* pw = std::get_if<PiecewiseLinearDetuning>(&shape_)) {
    if (pw->knots.empty()) throw Error(ErrorCode::InvalidArgument, "piecewise detuning needs at least one knot");
    for (std::size_t i = 1; i < pw->knots.size(); ++i) {
      if (!(pw->knots[i].t > pw->knots[i - 1].t))
        throw Error(ErrorCode::InvalidArgument, "piecewise detuning knots must be strictly increasing in t");
    }
  }
}

double DetuningProfile::operator()(double t) const noexcept {
  const double raw = std::visit(
      overloaded{
          [](const ConstantDetuning& c) { return c.value; },
          [t](const LinearDetuning& l) { return l.slope * (t - l.t_zero); },
          [t](const PiecewiseLinearDetuning& pw) {
            const auto& k = pw.knots;
            if (t <= k.front().t) return k.front().value;
            if (t >= k.back().t) return k.back().value;
            auto hi = std::upper_bound(k.begin(), k.end(), t, [](double x, const Knot& kn) { return x < kn.t; });
            auto lo = hi - 1;
            const double w = (t - lo->t) / (hi->t - lo->t);
            return lo->value + w * (hi->value - lo->value);
          },
      },
      shape_);
  return std::clamp(raw, -bound_, bound_);
}

double detuning_value(const DetuningProfile& profile, double t) noexcept { return profile(t); }

PolarizationError::PolarizationError(double eps) : value(eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "polarization error must lie in [0, 1]");
}

double coupling_factor(double t, PolarizationError eps, const DetuningProfile& profile) noexcept {
  return std::cos((kBraggResonance + profile(t)) * t) + eps.value;
}

std::vector<std::string> quasi_bragg_warnings(const PulseEnvelope& pulse, const DetuningProfile& profile) {
  std::vector<std::string> out;
  if (pulse.peak() >= kQuasiBraggLimit) {
    std::ostringstream os;
    os << "pulse amplitude " << pulse.peak() << " w_rec is not small against 8 w_rec";
    out.push_back(os.str());
  }
  if (profile.bound() >= kQuasiBraggLimit) {
    std::ostringstream os;
    os << "detuning bound " << profile.bound() << " w_rec is not small against 8 w_rec";
    out.push_back(os.str());
  }
  return out;
}

nlohmann::json to_json(const PulseEnvelope& pulse) {
  if (pulse.is_gaussian()) {
    const auto& g = pulse.as_gaussian();
    return {{"kind", "gaussian"}, {"omega_r", g.omega_r}, {"tau", g.tau}, {"t0", g.t0}};
  }
  const auto& b = pulse.as_box();
  return {{"kind", "box"}, {"omega", b.omega}, {"tau", b.tau}};
}

nlohmann::json to_json(const DetuningProfile& profile) {
  nlohmann::json j = std::visit(
      overloaded{
          [](const ConstantDetuning& c) { return nlohmann::json{{"kind", "constant"}, {"value", c.value}}; },
          [](const LinearDetuning& l) {
            return nlohmann::json{{"kind", "linear"}, {"slope", l.slope}, {"t_zero", l.t_zero}};
          },
          [](const PiecewiseLinearDetuning& pw) {
            nlohmann::json knots = nlohmann::json::array();
            for (const auto& k : pw.knots) knots.push_back({k.t, k.value});
            return nlohmann::json{{"kind", "piecewise"}, {"knots", knots}};
          },
      },
      profile.shape());
  j["bound"] = profile.bound();
  return j;
}

PulseEnvelope pulse_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian")
      return PulseEnvelope::gaussian(j.at("omega_r").get<double>(), j.at("tau").get<double>(), j.value("t0", 0.0));
    if (kind == "box") return PulseEnvelope::box(j.at("omega").get<double>(), j.at("tau").get<double>());
    throw Error(ErrorCode::ConfigError, "unknown pulse kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("pulse: ") + e.what());
  }
}

DetuningProfile detuning_from_json(const nlohmann::json& j) {
  try {
    const double bound = j.value("bound", kDefaultDetuningBound);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return DetuningProfile::constant(j.at("value").get<double>(), bound);
    if (kind == "linear")
      return DetuningProfile::linear(j.at("slope").get<double>(), j.value("t_zero", 0.0), bound);
    if (kind == "piecewise") {
      std::vector<Knot> knots;
      for (const auto& k : j.at("knots")) knots.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
      return DetuningProfile::piecewise(std::move(knots), bound);
    }
    throw Error(ErrorCode::ConfigError, "unknown detuning kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("detuning: ") + e.what());
  }
}

}  // namespace dbd
