#pragma once

#include <functional>

#include <Eigen/Dense>

#include "dbd/pulse.hpp"

namespace dbd {

/// Effective two-level Hamiltonian in the {|0>, |1>} interaction-picture
/// basis (zero momentum and first symmetric state), in units of hbar w_rec.
/// Obtained from a second-order Magnus expansion with constant detuning.
Eigen::Matrix2cd build_tls_hamiltonian(double omega, double delta, PolarizationError eps, double t);

/// Diagonal AC-Stark coefficients (per Omega^2 / w_rec) of the TLS Hamiltonian.
double tls_stark_coefficient_ground(double eps) noexcept;   // eps/4 - eps^2/2
double tls_stark_coefficient_excited(double eps) noexcept;  // -3/64 - eps/4 + 5 eps^2/12

/// Net resonance offset -delta - (3/64) Omega^2 of the RWA Hamiltonian.
double differential_light_shift(double omega, double delta) noexcept;

/// Time-independent RWA Hamiltonian [[0, Omega/sqrt2], [Omega/sqrt2, delta_diff]].
Eigen::Matrix2cd rwa_hamiltonian(double omega, double delta_diff) noexcept;

/// Rabi's formula for the transfer |0> -> |1> under the RWA Hamiltonian.
double rabi_population(double omega, double delta_diff, double t);

/// sin^2(sqrt(pi) Omega_R tau): resonant Gaussian-pulse transfer from the
/// pulse area alone.
double gaussian_pulse_area_population(double omega_r, double tau);

using MatrixSampler = std::function<Eigen::MatrixXcd(double)>;

struct MagnusTerms {
  Eigen::MatrixXcd g1;
  Eigen::MatrixXcd g2;
};

inline constexpr double kMagnusMaxStep = 1e-3;

/// First two Magnus terms of U(t, 0) for the sampled interaction-picture
/// Hamiltonian:
///   G1 = -i int_0^t H(t1) dt1
///   G2 = -1/2 int_0^t dt1 int_0^t1 dt2 [H(t1), H(t2)]
/// Composite Simpson quadrature on a uniform grid of the given step (the
/// step is shrunk so the grid ends exactly at t). Throws
/// QuadratureResolutionTooCoarse when step > max_step.
MagnusTerms magnus_terms(const MatrixSampler& hamiltonian, double t, double step = kMagnusMaxStep,
                         double max_step = kMagnusMaxStep);

/// Secular growth rate of the diagonal of i(G1 + G2), i.e. the time-averaged
/// diagonal of the effective Hamiltonian i d(G1 + G2)/dt. G2 is averaged over
/// sliding windows of one period (which removes oscillating and
/// linearly-modulated oscillating parts exactly when all drive frequencies
/// are multiples of 2 pi / period) and differenced across n_periods periods.
Eigen::VectorXd magnus_secular_rates(const MatrixSampler& hamiltonian, double period, int n_periods,
                                     double step = kMagnusMaxStep);

/// Interaction-picture Hamiltonian of the even-momentum ladder |0>, |1>, ...,
/// |levels-1> at zero momentum with constant Rabi frequency and detuning.
Eigen::MatrixXcd even_ladder_interaction_hamiltonian(int levels, double omega, PolarizationError eps, double delta,
                                                     double t);

}  // namespace dbd
