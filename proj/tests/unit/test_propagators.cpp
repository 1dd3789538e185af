#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "dbd/effective_tls.hpp"
#include "dbd/error.hpp"
#include "dbd/multilevel.hpp"
#include "dbd/propagators.hpp"
#include "dbd/pulse.hpp"

using namespace dbd;
using cd = std::complex<double>;

namespace {

TimeWindow window_of(const PulseEnvelope& p) {
  const auto w = p.default_window();
  return {w.first, w.second};
}

double l2_distance(const MomentumWavepacket& a, const MomentumWavepacket& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.amplitudes.size(); ++k) s += std::norm(a.amplitudes[k] - b.amplitudes[k]);
  return std::sqrt(s * a.grid.dp);
}

// Half the squared norm of psi(p) - psi(-p).
double antisymmetric_weight(const MomentumWavepacket& w) {
  const std::size_t n = w.grid.n_points;
  double s = 0.0;
  for (std::size_t k = 1; k < n; ++k) s += std::norm(w.amplitudes[k] - w.amplitudes[n - k]);
  return 0.5 * s * w.grid.dp;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("propagators") {

TEST_CASE("no drive leaves the state unchanged") {
  const auto pulse = PulseEnvelope::gaussian(0.0, 0.5, 0.0);
  for (auto pic : {Picture::Lab, Picture::Interaction}) {
    const auto r = propagate_multilevel(0.1, 2, pulse, DetuningProfile::constant(0.0), PolarizationError(0.0),
                                        window_of(pulse), {}, pic);
    CHECK(r.population(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.diagnostics.norm_drift < 1e-10);
  }
}

TEST_CASE("optimal constant detuning transfers the whole population") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.47, 0.0);
  const auto r = propagate_multilevel(0.0, 2, pulse, DetuningProfile::constant(0.25), PolarizationError(0.0),
                                      window_of(pulse));
  CHECK(r.population(1) + r.population(-1) == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(r.diagnostics.norm_drift < 1e-8);
}

TEST_CASE("few-level unitarity") {
  for (double om : {0.5, 2.0, 3.0}) {
    const auto pulse = PulseEnvelope::gaussian(om, 0.6, 0.0);
    const auto r = propagate_multilevel(0.13, 3, pulse, DetuningProfile::linear(0.5, 0.0), PolarizationError(0.05),
                                        window_of(pulse));
    CHECK(r.diagnostics.norm_drift < 1e-8);
    CHECK(r.populations.sum() == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("step controller failure is reported") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.47, 0.0);
  PropagationOptions o;
  o.max_steps = 3;
  CHECK(code_of([&] {
          (void)propagate_multilevel(0.0, 2, pulse, DetuningProfile::constant(0.0), PolarizationError(0.0),
                                     window_of(pulse), o);
        }) == ErrorCode::ToleranceNotMet);
}

TEST_CASE("TLS model follows the Rabi formula for weak box pulses") {
  // Far below the Bragg resonance the counter-rotating terms are small; the
  // TLS box evolution stays close to the RWA closed form.
  const auto pulse = PulseEnvelope::box(0.3, 7.0);
  const TlsModel model(pulse, DetuningProfile::constant(0.0), PolarizationError(0.0));
  const auto r = propagate_few_level(model, window_of(pulse));
  CHECK(std::abs(r.population(1) + r.population(-1) - rabi_population(0.3, differential_light_shift(0.3, 0.0), 7.0)) < 5e-3);
}

TEST_CASE("TLS model rejects time-dependent detuning") {
  CHECK_THROWS_AS(TlsModel(PulseEnvelope::box(1.0, 1.0), DetuningProfile::linear(1.0, 0.0), PolarizationError(0.0)),
                  Error);
}

TEST_CASE("bins of simple packets") {
  const auto w = gaussian_wavepacket(MomentumGrid{}, 0.0, 0.01);
  CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-10));
  auto bins = bin_populations(w);
  CHECK(bins[0] == doctest::Approx(1.0).epsilon(1e-10));
  for (const auto& [n, v] : bins)
    if (n != 0) CHECK(v < 1e-10);

  // Two equal coherent components at +-2.
  auto a = gaussian_wavepacket(MomentumGrid{}, 2.0, 0.01);
  const auto b = gaussian_wavepacket(MomentumGrid{}, -2.0, 0.01);
  for (std::size_t k = 0; k < a.amplitudes.size(); ++k) a.amplitudes[k] = (a.amplitudes[k] + b.amplitudes[k]) / std::sqrt(2.0);
  bins = bin_populations(a);
  CHECK(bins[1] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(bins[-1] == doctest::Approx(0.5).epsilon(1e-8));
  double total = 0.0;
  for (const auto& [n, v] : bins) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("points on a zone edge go to the lower zone") {
  MomentumGrid g{64, 0.25};
  MomentumWavepacket w{g, std::vector<cd>(64), 0.0, 0.1};
  // p = 1 sits at index 32 + 4.
  w.amplitudes[36] = 1.0 / std::sqrt(g.dp);
  auto bins = bin_populations(w);
  CHECK(bins[0] == doctest::Approx(1.0));
  CHECK(bins[1] == 0.0);
  w.amplitudes[36] = 0.0;
  w.amplitudes[37] = 1.0 / std::sqrt(g.dp);
  bins = bin_populations(w);
  CHECK(bins[1] == doctest::Approx(1.0));
}

TEST_CASE("free split-step evolution keeps the momentum distribution") {
  const auto w = gaussian_wavepacket(MomentumGrid{}, 0.3, 0.01);
  const auto r = split_step_evolve(PulseEnvelope::box(0.0, 1.0), DetuningProfile::constant(0.0),
                                   PolarizationError(0.0), w, {0.0, 0.5});
  double worst = 0.0, e0 = 0.0, e1 = 0.0;
  for (std::size_t k = 0; k < w.amplitudes.size(); ++k) {
    worst = std::max(worst, std::abs(std::norm(r.final_state.amplitudes[k]) - std::norm(w.amplitudes[k])));
    const double p = w.grid.p(k);
    e0 += p * p * std::norm(w.amplitudes[k]) * w.grid.dp;
    e1 += p * p * std::norm(r.final_state.amplitudes[k]) * w.grid.dp;
  }
  CHECK(worst < 1e-10);
  CHECK(std::abs(e1 - e0) < 1e-10);
}

TEST_CASE("split-step grid checks") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.47, 0.0);
  const auto det = DetuningProfile::constant(0.0);
  // Too narrow for sigma_p = 0.01 when the exact grid is enforced.
  const auto small = gaussian_wavepacket(MomentumGrid{1024, 1.0 / 50.0}, 0.0, 0.01);
  CHECK(code_of([&] { (void)split_step_evolve(pulse, det, PolarizationError(0.0), small, {-1.0, 1.0}); }) ==
        ErrorCode::GridTooCoarse);
  // Spacing not commensurate with the lattice.
  const auto odd = gaussian_wavepacket(MomentumGrid{4096, 0.003}, 0.0, 0.05);
  SplitStepOptions o;
  o.enforce_exact_grid = false;
  CHECK(code_of([&] { (void)split_step_evolve(pulse, det, PolarizationError(0.0), odd, {-1.0, 1.0}, o); }) ==
        ErrorCode::GridTooCoarse);
}

TEST_CASE("split-step is unitary and second order in dt") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.2, 0.0);
  const auto det = DetuningProfile::linear(0.5, -0.2);
  const auto w = gaussian_wavepacket(MomentumGrid{}, 0.0, 0.01);
  const TimeWindow win{-1.0, 1.0};
  auto run = [&](double dt) {
    SplitStepOptions o;
    o.dt = dt;
    return split_step_evolve(pulse, det, PolarizationError(0.05), w, win, o);
  };
  const auto ref = run(0.0025);
  const auto a = run(0.02);
  const auto b = run(0.01);
  CHECK(ref.diagnostics.norm_drift < 1e-8);
  const double ratio = l2_distance(a.final_state, ref.final_state) / l2_distance(b.final_state, ref.final_state);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("split-step preserves parity at zero momentum") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.47, 0.0);
  const auto w = gaussian_wavepacket(MomentumGrid{}, 0.0, 0.01);
  const auto r = split_step_evolve(pulse, DetuningProfile::constant(0.25), PolarizationError(0.1), w,
                                   window_of(pulse));
  CHECK(antisymmetric_weight(r.final_state) < 1e-6);
}

TEST_CASE("split-step agrees with the five-level model") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.45, 0.0);
  const TimeWindow win = window_of(pulse);
  struct Case {
    double p;
    DetuningProfile det;
  };
  const Case cases[] = {{-0.3, DetuningProfile::constant(0.0)},
                        {0.15, DetuningProfile::constant(0.0)},
                        {0.3, DetuningProfile::constant(0.0)},
                        {0.2, DetuningProfile::linear(1.0 / (5 * 0.45), -0.9 * 0.45)}};
  for (const auto& c : cases) {
    const auto exact =
        split_step_evolve(pulse, c.det, PolarizationError(0.0), gaussian_wavepacket(MomentumGrid{}, c.p, 0.01), win);
    auto bins = bin_populations(exact.final_state);
    const auto few = propagate_multilevel(c.p, 2, pulse, c.det, PolarizationError(0.0), win);
    CHECK(std::abs(bins[1] - few.population(1)) < 5e-3);
    CHECK(std::abs(bins[-1] - few.population(-1)) < 5e-3);
  }
}

TEST_CASE("split-step tracks the TLS for the resonant Gaussian pulse") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.47, 0.0);
  const auto exact = split_step_evolve(pulse, DetuningProfile::constant(0.0), PolarizationError(0.0),
                                       gaussian_wavepacket(MomentumGrid{}, 0.0, 0.01), window_of(pulse));
  auto bins = bin_populations(exact.final_state);
  const TlsModel tls(pulse, DetuningProfile::constant(0.0), PolarizationError(0.0));
  const auto r = propagate_few_level(tls, window_of(pulse));
  CHECK(std::abs(bins[1] + bins[-1] - r.population(1) - r.population(-1)) < 0.03);
}

TEST_CASE("assembly of a single sample") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.45, 0.0);
  const MultilevelModel m(MomentumBasis(0.1, 2), pulse, DetuningProfile::constant(0.0), PolarizationError(0.0));
  const auto r = propagate_few_level(m, window_of(pulse));
  const double dp = 0.01;
  const Eigen::VectorXcd bare = m.bare_amplitudes(m.to_lab(r.final_state.amplitudes, r.t_final));
  const auto w = assemble_wavepacket({{0.1, cd(1.0 / std::sqrt(dp), 0.0), bare}}, dp);
  auto bins = bin_populations(w);
  for (int n = -2; n <= 2; ++n) CHECK(bins[n] == doctest::Approx(r.population(n)).epsilon(1e-10));

  const Eigen::VectorXcd three = Eigen::VectorXcd::Zero(3);
  CHECK(code_of([&] { (void)assemble_wavepacket({{0.1, 1.0, bare}, {0.2, 1.0, three}}, dp); }) ==
        ErrorCode::InconsistentBasis);
}

TEST_CASE("moving packets prefer the minus port") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.45, 0.0);
  const auto w = few_level_wavepacket(0.2, 0.05, 2, pulse, DetuningProfile::constant(0.0), PolarizationError(0.0),
                                      window_of(pulse));
  auto bins = bin_populations(w);
  double total = 0.0;
  for (const auto& [n, v] : bins) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(bins[-1] > bins[1]);

  // Consistency with the per-momentum populations averaged over the packet.
  double plus = 0.0, minus = 0.0, wsum = 0.0;
  for (double p = 0.2 - 0.3; p <= 0.2 + 0.3 + 1e-12; p += 0.01) {
    const double g = std::exp(-(p - 0.2) * (p - 0.2) / (2 * 0.05 * 0.05));
    const auto r = propagate_multilevel(p, 2, pulse, DetuningProfile::constant(0.0), PolarizationError(0.0),
                                        window_of(pulse));
    plus += g * r.population(1);
    minus += g * r.population(-1);
    wsum += g;
  }
  CHECK(std::abs(bins[1] - plus / wsum) < 1e-3);
  CHECK(std::abs(bins[-1] - minus / wsum) < 1e-3);
}

}  // TEST_SUITE
