#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dbd/control.hpp"
#include "dbd/propagators.hpp"
#include "dbd/pulse.hpp"

namespace dbd {

// ---------------------------------------------------------------------------
// Model tiers

enum class TierKind { Tls, Rwa, FiveLevel, NLevel, Exact };

struct Tier {
  TierKind kind = TierKind::FiveLevel;
  int levels = 5;  // NLevel only: odd, >= 3

  static Tier tls() { return {TierKind::Tls, 2}; }
  static Tier rwa() { return {TierKind::Rwa, 2}; }
  static Tier five_level() { return {TierKind::FiveLevel, 5}; }
  static Tier n_level(int n);
  static Tier exact() { return {TierKind::Exact, 0}; }

  /// Accepts tls, rwa, five_level, exact, n_level(7) and n_level:7.
  static Tier parse(const std::string& name);
  std::string name() const;

  /// Shells in the multilevel ladder (few-level tiers only).
  int n_max() const;
};

/// Bare momentum orders reported by the exact tier.
inline constexpr int kExactReportOrders = 3;

// ---------------------------------------------------------------------------
// Single evolutions

struct ScenarioConfig {
  std::string id = "custom";
  Tier tier = Tier::five_level();
  PulseEnvelope pulse = PulseEnvelope::gaussian(2.0, 0.47, 0.0);
  DetuningProfile detuning;
  double eps = 0.0;
  double p = 0.0;           // initial (centre) momentum
  double sigma_p = 0.01;    // packet width, exact tier only
  std::optional<TimeWindow> window;
  double dt = 1e-3;         // split-step time step
  double tol = 1e-10;       // adaptive integrator relative tolerance
  std::size_t trajectory_samples = 0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  TimeWindow effective_window() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);

/// Throws IncompatibleTier when the tier cannot represent the scenario (for
/// example time-dependent detuning on the two-level tiers).
void check_tier_support(const Tier& tier, const ScenarioConfig& c);

struct SimulationResult {
  int max_order = 0;
  Eigen::VectorXd populations;  // bare orders -K..K at index n + K
  Diagnostics diagnostics;
  std::vector<TrajectorySample> trajectory;
  std::optional<MomentumWavepacket> packet;  // exact tier

  double port(int order) const;
  /// Population in the first-order pair |p +/- 2 hbar k_L>.
  double dbd_efficiency() const { return port(1) + port(-1); }
  /// 1 - single-sample beam splitter cost.
  double oct_bs_efficiency() const { return 1.0 - bs_cost(port(1), port(-1)); }
};

SimulationResult simulate(const ScenarioConfig& c);

// ---------------------------------------------------------------------------
// Scans

struct ScanAxis {
  std::string name;  // tau | omega | delta | eps | p | t0
  std::vector<double> values;
};

std::vector<double> linspace(double lo, double hi, std::size_t n);
/// lo, lo + step, ... up to hi (inclusive within a tenth of a step).
std::vector<double> arange(double lo, double hi, double step);

/// Copy of `c` with one named parameter replaced.
ScenarioConfig apply_axis(ScenarioConfig c, const std::string& axis, double value);

struct ScanRecord {
  std::vector<double> params;  // one entry per axis
  Eigen::VectorXd populations;
  double dbd_efficiency = 0.0;
  double oct_bs_efficiency = 0.0;
  double norm_drift = 0.0;
  double leakage = 0.0;
};

struct ScanTable {
  std::vector<std::string> axes;
  int max_order = 0;
  std::vector<ScanRecord> rows;

  /// Header of axis names then metric names; 12 significant digits; LF.
  void write_csv(std::ostream& os) const;
};

/// Cartesian product of the axes, first axis slowest. Points run
/// concurrently; rows come back in grid order.
ScanTable run_scan(const ScenarioConfig& c, const std::vector<ScanAxis>& axes);

/// Box-pulse duration scan from one long evolution (the state after a box of
/// length tau equals the state at time tau of a longer box). Returns bare
/// populations per tau.
std::vector<Eigen::VectorXd> box_duration_scan(const ScenarioConfig& c, const std::vector<double>& taus);

struct FirstCyclePeak {
  double tau = 0.0;
  double efficiency = 0.0;
};

/// Maximum of efficiency(tau) over tau = start, start + step, ... inside the
/// first Rabi cycle; the scan stops once the efficiency has fallen below half
/// of a peak above 0.5, or at tau_max.
FirstCyclePeak first_cycle_peak(const std::function<double(double)>& efficiency, double step = 0.005,
                                double start = 0.005, double tau_max = 3.0);

// ---------------------------------------------------------------------------
// Tier comparison

struct DeviationReport {
  std::string tier_a;
  std::string tier_b;
  std::vector<int> orders;
  std::vector<double> max_deviation;   // per order
  std::vector<double> mean_deviation;  // per order
  double max_target = 0.0;             // |P1_a - P1_b| on P(+1) + P(-1)
  double mean_target = 0.0;
  std::size_t points = 0;

  nlohmann::json to_json() const;
};

/// Runs both tiers on every scan point (or the single scenario when `axes`
/// is empty) and compares bare populations on the orders both report.
DeviationReport validate(const Tier& a, const Tier& b, const ScenarioConfig& c, const std::vector<ScanAxis>& axes = {});

/// Comparison of two population tables on orders -K..K.
DeviationReport compare_populations(const std::string& name_a, const std::vector<Eigen::VectorXd>& a,
                                    const std::string& name_b, const std::vector<Eigen::VectorXd>& b);

// ---------------------------------------------------------------------------
// Figure presets

struct ReproduceOptions {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double dt = 1e-3;
  double tol = 1e-10;
  /// Optimization outcome to evaluate instead of running the campaign
  /// (doppler_oct, combined_map, sigma05).
  std::string outcome_path;
  /// Campaign definitions directory (used when no outcome is given).
  std::string campaign_dir = "tools/campaigns";
  /// Coarser grids for smoke runs.
  bool quick = false;
  ProgressCallback progress;
};

std::vector<std::string> figure_ids();

/// Writes <out>/<figure>.csv (plus extra tables for some figures) and
/// <out>/<figure>_summary.json; returns the summary. Throws UnknownFigure.
nlohmann::json reproduce(const std::string& figure, const ReproduceOptions& options);

/// Deterministic CSV number formatting (12 significant digits).
std::string format_number(double v);

}  // namespace dbd
