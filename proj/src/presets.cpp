#include "dbd/presets.hpp"

namespace dbd::presets {

namespace {

nlohmann::json triple_json(const GaussianTriple& g) {
  return {{"omega_r", g.omega_r}, {"tau", g.tau}, {"t0", g.t0}};
}

}  // namespace

std::vector<NamedTriple> optimized_triples() {
  return {
      {"oct_polarization", kOctPolarization}, {"oct_doppler", kOctDoppler},
      {"oct_combined_text", kOctCombinedText}, {"oct_combined_map", kOctCombinedMap},
      {"oct_combined_cut", kOctCombinedCut},   {"oct_sigma05", kOctSigma05},
  };
}

nlohmann::json registry_json() {
  nlohmann::json j;
  j["version"] = kPresetVersion;
  j["box"] = {{"omega", kBoxOmega}, {"tau_max", kBoxTauMax}};
  j["gaussian_bs"] = triple_json(kGaussianBs);
  j["gaussian_bs_doppler"] = triple_json(kGaussianBsDoppler);
  j["selectivity_pulse"] = triple_json(kSelectivityPulse);
  j["polarization_sweep"] = {{"widths", kPolarizationSweepWidths}, {"offset", kPolarizationSweepOffset}};
  j["doppler_sweep"] = {{"widths", kDopplerSweepWidths}, {"offset", kDopplerSweepOffset}};
  j["doppler_constant_detuning"] = kDopplerConstantDetuning;
  for (const auto& t : optimized_triples()) j["optimized"][t.name] = triple_json(t.value);
  j["constant_detuning"]["eps"] = std::vector<double>(std::begin(kConstantDetuningEps), std::end(kConstantDetuningEps));
  j["constant_detuning"]["optima"] =
      std::vector<double>(std::begin(kConstantDetuningOptima), std::end(kConstantDetuningOptima));
  j["sweep_peak"] = {{"efficiency", kSweepPeakEfficiency}, {"eps", kSweepPeakEps}, {"robust_eps", kSweepRobustEps}};
  j["acceptance_half_width"] = kAcceptanceHalfWidth;
  j["wavepacket"] = {{"sigma_p", kWavepacketSigma}, {"p0", kWavepacketP0}};
  j["plane_wave_sigma"] = kPlaneWaveSigma;
  return j;
}

}  // namespace dbd::presets
