#pragma once

#include <Eigen/Dense>

namespace dbd {

/// Symmetric/antisymmetric momentum ladder over an initial momentum p in the
/// first Brillouin zone. Index 0 is |p>; for n = 1..n_max index 2n-1 holds
/// |n,+> and index 2n holds |n,->, with
///   |n,+/-> = (|p + 2n hbar k_L> +/- |p - 2n hbar k_L>) / sqrt(2).
struct MomentumBasis {
  double p = 0.0;
  int n_max = 2;

  MomentumBasis() = default;
  MomentumBasis(double p, int n_max);

  int dimension() const noexcept { return 2 * n_max + 1; }
  static int symmetric_index(int n) noexcept { return 2 * n - 1; }
  static int antisymmetric_index(int n) noexcept { return 2 * n; }

  /// Lab-frame diagonal (kinetic energies) p^2 and p^2 + 4 n^2.
  Eigen::VectorXd energies() const;
};

enum class Picture { Lab, Interaction };

struct FewLevelState {
  Eigen::VectorXcd amplitudes;
  Picture picture = Picture::Lab;
};

/// Lab-frame Hamiltonian (units of hbar w_rec) given the instantaneous Rabi
/// frequency and coupling factor C(t). Throws BasisTooSmall for n_max < 1.
Eigen::MatrixXcd build_lab_hamiltonian(const MomentumBasis& basis, double omega, double c, double t);

/// The same Hamiltonian in the interaction picture with respect to its
/// diagonal: zero diagonal, lattice couplings carrying exp(i (E_i - E_j) t).
Eigen::MatrixXcd build_interaction_hamiltonian(const MomentumBasis& basis, double omega, double c, double t);

/// Doppler coupling 4 n p between |n,+> and |n,->.
double doppler_shift(double p, int n) noexcept;

enum class Side { Left, Right };

/// Energy defect of the left (-2 hbar k_L) or right (+2 hbar k_L) transition
/// relative to the p = 0 resonance: -4 p0 and +4 p0.
double asymmetry_energy_defect(double p0, Side side) noexcept;

/// Populations in the bare momentum states p + 2 n hbar k_L, n = -n_max..n_max,
/// stored at index n + n_max. Valid in either picture.
Eigen::VectorXd bare_populations(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes);

/// Bare momentum amplitudes in the same picture as the input.
Eigen::VectorXcd bare_amplitudes(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes);

/// Total population of the highest shell n = n_max (both parities).
double top_shell_population(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes);

/// Maps interaction-picture amplitudes at time t to the lab frame,
/// c_lab = exp(-i E t) c_int, and back.
Eigen::VectorXcd interaction_to_lab(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes, double t);
Eigen::VectorXcd lab_to_interaction(const MomentumBasis& basis, const Eigen::VectorXcd& amplitudes, double t);

}  // namespace dbd
