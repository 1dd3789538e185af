#include "dbd/multilevel.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "dbd/error.hpp"
#include "dbd/pulse.hpp"

namespace dbd {

using cd = std::complex<double>;
using std::numbers::sqrt2;

MomentumBasis::MomentumBasis(double p_, int n_max_) : p(p_), n_max(n_max_) {
  if (n_max < 1) throw Error(ErrorCode::BasisTooSmall, "momentum basis needs n_max >= 1");
  if (!(p >= -1.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "initial momentum must lie in [-1, 1)");
}

Eigen::VectorXd MomentumBasis::energies() const {
  Eigen::VectorXd e(dimension());
  e[0] = p * p;
  for (int n = 1; n <= n_max; ++n) {
    e[symmetric_index(n)] = p * p + kBraggResonance * n * n;
    e[antisymmetric_index(n)] = p * p + kBraggResonance * n * n;
  }
  return e;
}

namespace {

void require_valid(const MomentumBasis& basis) {
  if (basis.n_max < 1) throw Error(ErrorCode::BasisTooSmall, "momentum basis needs n_max >= 1");
}

}  // namespace

Eigen::MatrixXcd build_lab_hamiltonian(const MomentumBasis& basis, double omega, double c, double /*t*/) {
  require_valid(basis);
  const int dim = basis.dimension();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const Eigen::VectorXd e = basis.energies();
  for (int i = 0; i < dim; ++i) h(i, i) = e[i];

  const double g = omega * c;
  h(0, 1) = h(1, 0) = sqrt2 * g;
  for (int n = 1; n <= basis.n_max; ++n) {
    const int s = MomentumBasis::symmetric_index(n);
    const int a = MomentumBasis::antisymmetric_index(n);
    h(s, a) = h(a, s) = doppler_shift(basis.p, n);
    if (n < basis.n_max) {
      h(s, s + 2) = h(s + 2, s) = g;
      h(a, a + 2) = h(a + 2, a) = g;
    }
  }
  return h;
}

Eigen::MatrixXcd build_interaction_hamiltonian(const MomentumBasis& basis, double omega, double c, double t) {
  Eigen::MatrixXcd h = build_lab_hamiltonian(basis, omega, c, t);
  const Eigen::VectorXd e = basis.energies();
  const int dim = basis.dimension();
  for (int i = 0; i < dim; ++i) {
    h(i, i) = 0.0;
    for (int j = i + 1; j < dim; ++j) {
      if (h(i, j) == cd{}) continue;
      const cd phase = std::polar(1.0, (e[i] - e[j]) * t);
      h(i, j) *= phase;
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

double doppler_shift(double p, int n) noexcept { return kBraggResonance * n * p; }

double asymmetry_energy_defect(double p0, Side side) noexcept {
  return side == Side::Left ? -kBraggResonance * p0 : kBraggResonance * p0;
}

Eigen::VectorXcd bare_amplitudes(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes) {
  if (amplitudes.size() != basis.dimension())
    throw Error(ErrorCode::InconsistentBasis, "amplitude vector does not match the momentum basis");
  const int n_max = basis.n_max;
  Eigen::VectorXcd bare(2 * n_max + 1);
  bare[n_max] = amplitudes[0];
  for (int n = 1; n <= n_max; ++n) {
    const cd s = amplitudes[MomentumBasis::symmetric_index(n)];
    const cd a = amplitudes[MomentumBasis::antisymmetric_index(n)];
    bare[n_max + n] = (s + a) / sqrt2;
    bare[n_max - n] = (s - a) / sqrt2;
  }
  return bare;
}

Eigen::VectorXd bare_populations(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes) {
  return bare_amplitudes(basis, amplitudes).cwiseAbs2();
}

double top_shell_population(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes) {
  const int n = basis.n_max;
  return std::norm(amplitudes[MomentumBasis::symmetric_index(n)]) +
         std::norm(amplitudes[MomentumBasis::antisymmetric_index(n)]);
}

Eigen::VectorXcd interaction_to_lab(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes, double t) {
  const Eigen::VectorXd e = basis.energies();
  Eigen::VectorXcd out(amplitudes.size());
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) out[i] = std::polar(1.0, -e[i] * t) * amplitudes[i];
  return out;
}

Eigen::VectorXcd lab_to_interaction(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes, double t) {
  return interaction_to_lab(basis, amplitudes, -t);
}

}  // namespace dbd
