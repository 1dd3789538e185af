#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "dbd/error.hpp"
#include "dbd/multilevel.hpp"
#include "dbd/propagators.hpp"
#include "dbd/pulse.hpp"

using namespace dbd;
using cd = std::complex<double>;

TEST_SUITE("multilevel") {

TEST_CASE("lab Hamiltonian entries") {
  const MomentumBasis b(0.2, 2);
  const auto h = build_lab_hamiltonian(b, 2.0, 1.1, 0.0);
  REQUIRE(h.rows() == 5);
  CHECK(h(0, 0).real() == doctest::Approx(0.04));
  CHECK(h(1, 1).real() == doctest::Approx(4.04));
  CHECK(h(3, 3).real() == doctest::Approx(16.04));
  CHECK(h(1, 2).real() == doctest::Approx(0.8));
  CHECK(h(3, 4).real() == doctest::Approx(1.6));
  CHECK(h(0, 1).real() == doctest::Approx(std::sqrt(2.0) * 2 * 1.1));
  CHECK(h(0, 1).real() == doctest::Approx(3.1113).epsilon(1e-4));
  CHECK(h(1, 3).real() == doctest::Approx(2.2));
  CHECK(h(2, 4).real() == doctest::Approx(2.2));
  // Nothing else is populated.
  CHECK(std::abs(h(0, 2)) == 0.0);
  CHECK(std::abs(h(0, 3)) == 0.0);
  CHECK(std::abs(h(1, 4)) == 0.0);
  CHECK(std::abs(h(2, 3)) == 0.0);

  const auto h0 = build_lab_hamiltonian(MomentumBasis(0.0, 3), 1.0, 0.5, 0.3);
  for (int n = 1; n <= 3; ++n)
    CHECK(std::abs(h0(MomentumBasis::symmetric_index(n), MomentumBasis::antisymmetric_index(n))) == 0.0);
}

TEST_CASE("basis validation") {
  CHECK_THROWS_AS(MomentumBasis(0.0, 0), Error);
  try {
    (void)MomentumBasis(0.0, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BasisTooSmall);
  }
  CHECK_THROWS_AS(MomentumBasis(1.0, 2), Error);
  CHECK_THROWS_AS(MomentumBasis(-1.2, 2), Error);
  CHECK_NOTHROW(MomentumBasis(-1.0, 2));
}

TEST_CASE("interaction Hamiltonian") {
  const MomentumBasis b(0.15, 2);
  const auto lab = build_lab_hamiltonian(b, 1.4, 0.9, 0.0);
  const auto in0 = build_interaction_hamiltonian(b, 1.4, 0.9, 0.0);
  Eigen::MatrixXcd off = lab;
  off.diagonal().setZero();
  CHECK((in0 - off).norm() < 1e-13);

  const double t = 0.37;
  const auto in = build_interaction_hamiltonian(b, 1.4, 0.9, t);
  const cd I(0, 1);
  CHECK(in.diagonal().norm() == 0.0);
  CHECK(std::abs(in(0, 1) - std::sqrt(2.0) * 1.4 * 0.9 * std::exp(-4.0 * I * t)) < 1e-12);
  CHECK(std::abs(in(1, 3) - 1.4 * 0.9 * std::exp(-12.0 * I * t)) < 1e-12);
  CHECK(std::abs(in(1, 2) - 0.6) < 1e-12);
  CHECK(std::abs(in(3, 4) - 1.2) < 1e-12);

  // p = 0: antisymmetric states couple only among themselves.
  const auto s = build_interaction_hamiltonian(MomentumBasis(0.0, 3), 1.0, 1.2, 0.8);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      const bool ai = i > 0 && i % 2 == 0, aj = j > 0 && j % 2 == 0;
      if (ai != aj) CHECK(std::abs(s(i, j)) == 0.0);
    }
}

TEST_CASE("builders are Hermitian") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const MomentumBasis b(2 * u(rng) - 1, 1 + static_cast<int>(4 * u(rng)));
    const double om = 4 * u(rng), c = 2.4 * u(rng) - 1.2, t = 10 * u(rng);
    const auto lab = build_lab_hamiltonian(b, om, c, t);
    const auto in = build_interaction_hamiltonian(b, om, c, t);
    CHECK((lab - lab.adjoint()).norm() < 1e-13);
    CHECK((in - in.adjoint()).norm() < 1e-13);
  }
}

TEST_CASE("Doppler shift and asymmetry energy") {
  CHECK(doppler_shift(0.0, 3) == 0.0);
  CHECK(doppler_shift(0.2, 1) == doctest::Approx(0.8));
  CHECK(doppler_shift(-0.1, 2) == doctest::Approx(-0.8));
  CHECK(asymmetry_energy_defect(0.0, Side::Left) == 0.0);
  CHECK(asymmetry_energy_defect(0.0, Side::Right) == 0.0);
  CHECK(asymmetry_energy_defect(0.2, Side::Right) == doctest::Approx(0.8));
  for (double p : {-0.3, -0.01, 0.05, 0.4})
    CHECK(asymmetry_energy_defect(p, Side::Left) == -asymmetry_energy_defect(p, Side::Right));
}

TEST_CASE("bare populations from the symmetric basis") {
  const MomentumBasis b(0.0, 2);
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(5);
  a[1] = 1.0;  // |1,+>
  const auto pops = bare_populations(b, a);
  CHECK(pops[1] == doctest::Approx(0.5));
  CHECK(pops[3] == doctest::Approx(0.5));
  a.setZero();
  a[1] = a[2] = 1.0 / std::sqrt(2.0);  // |p + 2>
  const auto p2 = bare_populations(b, a);
  CHECK(p2[3] == doctest::Approx(1.0));
  CHECK(p2[1] == doctest::Approx(0.0));
}

TEST_CASE("lab and interaction pictures give the same populations") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.45, 0.0);
  const auto w = pulse.default_window();
  for (double p : {0.0, 0.2, -0.17})
    for (double eps : {0.0, 0.08}) {
      const auto det = DetuningProfile::linear(0.3, -0.4);
      const auto a = propagate_multilevel(p, 2, pulse, det, PolarizationError(eps), {w.first, w.second}, {}, Picture::Lab);
      const auto b = propagate_multilevel(p, 2, pulse, det, PolarizationError(eps), {w.first, w.second}, {},
                                          Picture::Interaction);
      CHECK((a.populations - b.populations).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("parity decoupling at zero momentum") {
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.47, 0.0);
  const auto w = pulse.default_window();
  PropagationOptions o;
  o.trajectory_samples = 50;
  const MomentumBasis basis(0.0, 2);
  const MultilevelModel model(basis, pulse, DetuningProfile::constant(0.25), PolarizationError(0.1));
  const auto r = propagate_few_level(model, {w.first, w.second}, o);
  // Antisymmetric amplitudes are differences of mirrored bare amplitudes.
  const auto amp = r.final_state.amplitudes;
  CHECK(std::norm(amp[2]) + std::norm(amp[4]) < 1e-8);
  for (const auto& s : r.trajectory) {
    CHECK(std::abs(s.populations[1] - s.populations[3]) < 1e-8);
    CHECK(std::abs(s.populations[0] - s.populations[4]) < 1e-8);
  }
}

TEST_CASE("truncation converges in the quasi-Bragg regime") {
  for (double om : {1.0, 2.0})
    for (double d : {-1.0, 0.0, 0.6})
      for (double p : {0.0, 0.15}) {
        const auto pulse = PulseEnvelope::gaussian(om, 0.47, 0.0);
        const auto w = pulse.default_window();
        const auto det = DetuningProfile::constant(d);
        const auto a = propagate_multilevel(p, 2, pulse, det, PolarizationError(0.0), {w.first, w.second});
        const auto b = propagate_multilevel(p, 4, pulse, det, PolarizationError(0.0), {w.first, w.second});
        CHECK(std::abs(a.population(1) - b.population(1)) < 1e-3);
        CHECK(std::abs(a.population(-1) - b.population(-1)) < 1e-3);
      }
}

TEST_CASE("leakage into the top shell is flagged") {
  const auto pulse = PulseEnvelope::gaussian(6.0, 0.6, 0.0);
  const auto w = pulse.default_window();
  const auto r = propagate_multilevel(0.0, 1, pulse, DetuningProfile::constant(0.0), PolarizationError(0.0),
                                      {w.first, w.second});
  CHECK(r.diagnostics.leakage > kLeakageThreshold);
  CHECK(r.diagnostics.leakage_flag);
}

}  // TEST_SUITE
