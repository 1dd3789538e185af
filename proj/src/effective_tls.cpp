#include "dbd/effective_tls.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dbd/error.hpp"

namespace dbd {

using cd = std::complex<double>;
using std::numbers::sqrt2;

namespace {

constexpr cd kI{0.0, 1.0};

// Running integral of uniformly sampled values, third-order accurate at every
// node: Simpson on even nodes, a quadratic through (k-1, k, k+1) to step onto
// odd nodes.
template <class T>
std::vector<T> cumulative_integral(const std::vector<T>& f, double h) {
  const std::size_t n = f.size();
  std::vector<T> out(n);
  out[0] = f[0] * 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    if (k % 2 == 0) {
      out[k] = out[k - 2] + (f[k - 2] + 4.0 * f[k - 1] + f[k]) * (h / 3.0);
    } else if (k + 1 < n) {
      out[k] = out[k - 1] + (5.0 * f[k - 1] + 8.0 * f[k] - f[k + 1]) * (h / 12.0);
    } else {
      out[k] = out[k - 1] + (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]) * (h / 12.0);
    }
  }
  return out;
}

}  // namespace

Eigen::Matrix2cd build_tls_hamiltonian(double omega, double delta, PolarizationError eps, double t) {
  const double e = eps.value;
  const double o2 = omega * omega;
  const cd off = (sqrt2 / 2.0) * omega *
                 (std::exp(kI * (delta * t)) + std::exp(-kI * ((delta + 2.0 * kBraggResonance) * t)) +
                  2.0 * e * std::exp(-kI * (kBraggResonance * t)));
  Eigen::Matrix2cd h;
  h(0, 0) = o2 * tls_stark_coefficient_ground(e);
  h(1, 1) = o2 * tls_stark_coefficient_excited(e);
  h(0, 1) = off;
  h(1, 0) = std::conj(off);
  return h;
}

double tls_stark_coefficient_ground(double eps) noexcept { return 0.25 * eps - 0.5 * eps * eps; }

double tls_stark_coefficient_excited(double eps) noexcept {
  return -3.0 / 64.0 - 0.25 * eps + 5.0 / 12.0 * eps * eps;
}

double differential_light_shift(double omega, double delta) noexcept { return -delta - 3.0 / 64.0 * omega * omega; }

Eigen::Matrix2cd rwa_hamiltonian(double omega, double delta_diff) noexcept {
  Eigen::Matrix2cd h;
  h << 0.0, sqrt2 / 2.0 * omega, sqrt2 / 2.0 * omega, delta_diff;
  return h;
}

double rabi_population(double omega, double delta_diff, double t) {
  if (!(omega >= 0.0)) throw Error(ErrorCode::InvalidArgument, "Rabi frequency must be >= 0");
  const double w2 = 2.0 * omega * omega + delta_diff * delta_diff;
  if (w2 == 0.0) return 0.0;
  const double s = std::sin(std::sqrt(w2) * t / 2.0);
  return 2.0 * omega * omega / w2 * s * s;
}

double gaussian_pulse_area_population(double omega_r, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "pulse width must be > 0");
  const double s = std::sin(std::sqrt(std::numbers::pi) * omega_r * tau);
  return s * s;
}

MagnusTerms magnus_terms(const MatrixSampler& hamiltonian, double t, double step, double max_step) {
  if (!(step > 0.0) || step > max_step)
    throw Error(ErrorCode::QuadratureResolutionTooCoarse, "Magnus quadrature step exceeds the resolution limit");
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "Magnus end time must be >= 0");

  const Eigen::MatrixXcd h0 = hamiltonian(0.0);
  const Eigen::Index dim = h0.rows();
  if (t == 0.0) return {Eigen::MatrixXcd::Zero(dim, dim), Eigen::MatrixXcd::Zero(dim, dim)};

  std::size_t n = static_cast<std::size_t>(std::ceil(t / step));
  if (n % 2) ++n;
  const double h = t / static_cast<double>(n);

  std::vector<Eigen::MatrixXcd> samples(n + 1);
  samples[0] = h0;
  for (std::size_t k = 1; k <= n; ++k) samples[k] = hamiltonian(h * static_cast<double>(k));

  const auto running = cumulative_integral(samples, h);
  std::vector<Eigen::MatrixXcd> comm(n + 1);
  for (std::size_t k = 0; k <= n; ++k) comm[k] = samples[k] * running[k] - running[k] * samples[k];
  const auto g2 = cumulative_integral(comm, h);

  return {-kI * running[n], -0.5 * g2[n]};
}

Eigen::VectorXd magnus_secular_rates(const MatrixSampler& hamiltonian, double period, int n_periods, double step) {
  if (!(step > 0.0) || step > kMagnusMaxStep)
    throw Error(ErrorCode::QuadratureResolutionTooCoarse, "Magnus quadrature step exceeds the resolution limit");
  if (!(period > 0.0) || n_periods < 3)
    throw Error(ErrorCode::InvalidArgument, "need a positive period and at least three periods");

  std::size_t per = static_cast<std::size_t>(std::ceil(period / step));
  if (per % 2) ++per;
  const double h = period / static_cast<double>(per);
  const std::size_t n = per * static_cast<std::size_t>(n_periods);

  const Eigen::MatrixXcd h0 = hamiltonian(0.0);
  const Eigen::Index dim = h0.rows();

  // Running integral F of H, integrand Q = [H, F], G2 = -1/2 int Q, and the
  // diagonal of G2 integrated once more for the window averages.
  std::vector<Eigen::MatrixXcd> H(n + 1);
  H[0] = h0;
  for (std::size_t k = 1; k <= n; ++k) H[k] = hamiltonian(h * static_cast<double>(k));
  const auto F = cumulative_integral(H, h);
  std::vector<Eigen::MatrixXcd> Q(n + 1);
  for (std::size_t k = 0; k <= n; ++k) Q[k] = H[k] * F[k] - F[k] * H[k];
  H.clear();
  H.shrink_to_fit();
  const auto intQ = cumulative_integral(Q, h);

  std::vector<Eigen::VectorXcd> g2diag(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g2diag[k] = -0.5 * intQ[k].diagonal();
  const auto acc = cumulative_integral(g2diag, h);

  auto window_mean = [&](std::size_t start) -> Eigen::VectorXcd { return (acc[start + per] - acc[start]) / period; };
  const std::size_t first = 0;
  const std::size_t last = n - per;
  const double span = h * static_cast<double>(last - first);
  const Eigen::VectorXcd slope = (window_mean(last) - window_mean(first)) / span;

  Eigen::VectorXd rates(dim);
  for (Eigen::Index j = 0; j < dim; ++j) rates[j] = (kI * slope[j]).real();
  return rates;
}

Eigen::MatrixXcd even_ladder_interaction_hamiltonian(int levels, double omega, PolarizationError eps, double delta,
                                                     double t) {
  if (levels < 2) throw Error(ErrorCode::BasisTooSmall, "even ladder needs at least two levels");
  const double c = std::cos((kBraggResonance + delta) * t) + eps.value;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(levels, levels);
  for (int n = 0; n + 1 < levels; ++n) {
    // E_n = 4 n^2, so E_n - E_{n+1} = -4 (2n + 1).
    const double factor = n == 0 ? sqrt2 : 1.0;
    const cd v = factor * omega * c * std::exp(-kI * (kBraggResonance * (2.0 * n + 1.0) * t));
    h(n, n + 1) = v;
    h(n + 1, n) = std::conj(v);
  }
  return h;
}

}  // namespace dbd
