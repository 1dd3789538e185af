#pragma once

// Published parameter tuples used by the figure presets and regression
// tests. Bump kPresetVersion whenever a value changes.

#include <string>
#include <vector>

#include <json.hpp>

namespace dbd::presets {

inline constexpr int kPresetVersion = 1;

struct GaussianTriple {
  double omega_r;
  double tau;
  double t0;
};

// Box pulse used for the duration scans.
inline constexpr double kBoxOmega = 2.0;
inline constexpr double kBoxTauMax = 10.0;

// Gaussian beam splitter at the standard resonance condition.
inline constexpr GaussianTriple kGaussianBs{2.0, 0.47, 0.0};
inline constexpr GaussianTriple kGaussianBsDoppler{2.0, 0.45, 0.0};
inline constexpr GaussianTriple kSelectivityPulse{1.0, 0.91, 0.0};

// Linear sweeps: delta(t) = (t - t_zero) * slope.
inline constexpr double kPolarizationSweepWidths = 2.5;   // slope 1 / (2.5 tau)
inline constexpr double kPolarizationSweepOffset = 1.0;   // zero at t0 - tau
inline constexpr double kDopplerSweepWidths = 5.0;        // slope 1 / (5 tau)
inline constexpr double kDopplerSweepOffset = 0.9;        // zero at -0.9 tau

inline constexpr double kDopplerConstantDetuning = 0.345;

// Optimized triples as printed.
inline constexpr GaussianTriple kOctPolarization{1.617, 0.583, 2.859};
inline constexpr GaussianTriple kOctDoppler{2.079, 0.534, 2.463};
inline constexpr GaussianTriple kOctCombinedText{1.646, 0.788, 4.770};
inline constexpr GaussianTriple kOctCombinedMap{1.264, 0.915, 4.065};
inline constexpr GaussianTriple kOctCombinedCut{2.230, 0.505, 2.970};
inline constexpr GaussianTriple kOctSigma05{1.264, 0.915, 4.065};

// Reference metrics.
inline constexpr double kTlsExactMaxDeviation = 0.03;
inline constexpr double kSweepPeakEfficiency = 0.99976;
inline constexpr double kSweepPeakEps = 0.045;
inline constexpr double kSweepRobustEps = 0.085;
inline constexpr double kConstantDetuningEps[4] = {0.0, 0.1, 0.2, 0.3};
inline constexpr double kConstantDetuningOptima[4] = {0.25, 0.55, 0.80, 1.10};
inline constexpr double kAcceptanceHalfWidth = 0.1;
inline constexpr double kWavepacketSigma = 0.05;
inline constexpr double kWavepacketP0 = 0.2;
inline constexpr double kPlaneWaveSigma = 0.01;
inline constexpr double kSigma05MeanPopulation = 0.9992;

struct NamedTriple {
  std::string name;
  GaussianTriple value;
};

/// Every optimized triple, in a fixed order.
std::vector<NamedTriple> optimized_triples();

/// The whole registry as JSON (includes the version).
nlohmann::json registry_json();

}  // namespace dbd::presets
