#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbd/propagators.hpp"
#include "dbd/pulse.hpp"

namespace dbd {

/// Delta(t) = (t - t0 + tau) / (2.5 tau): compensates the AC-Stark and
/// polarization shifts across the pulse.
DetuningProfile linear_sweep_polarization(double tau, double t0 = 0.0);

/// Delta(t) = (t + 0.9 tau) / (5 tau), for pulses centred at t = 0.
DetuningProfile linear_sweep_doppler(double tau);

// ---------------------------------------------------------------------------
// Error sampling

struct ErrorSample {
  double eps = 0.0;
  double p = 0.0;
  double weight = 1.0;
};

enum class AxisKind { Fixed, Uniform, Gaussian, Grid };

/// One sampling axis. Fixed: value a. Uniform: [a, b]. Gaussian: mean a,
/// standard deviation b. Grid: count equally spaced points from a to b,
/// both ends included.
struct AxisSpec {
  AxisKind kind = AxisKind::Fixed;
  double a = 0.0;
  double b = 0.0;
  int count = 1;

  static AxisSpec fixed(double v) { return {AxisKind::Fixed, v, v, 1}; }
  static AxisSpec uniform(double lo, double hi, int count) { return {AxisKind::Uniform, lo, hi, count}; }
  static AxisSpec gaussian(double mean, double sigma, int count) { return {AxisKind::Gaussian, mean, sigma, count}; }
  static AxisSpec grid(double lo, double hi, int count) { return {AxisKind::Grid, lo, hi, count}; }
};

struct SamplingSpec {
  AxisSpec eps = AxisSpec::fixed(0.0);
  AxisSpec p = AxisSpec::fixed(0.0);
  std::uint64_t seed = 0;
};

/// Uniform axes with count <= this use stratified midpoints; above it they
/// draw from a seeded generator.
inline constexpr int kStratifiedLimit = 16;

/// Product of the eps and p axes. Deterministic for a given spec and seed.
std::vector<ErrorSample> sample_errors(const SamplingSpec& spec);

/// Gauss-Hermite nodes and weights for weight exp(-x^2) (Golub-Welsch).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

// ---------------------------------------------------------------------------
// Cost

struct PortPopulations {
  double plus = 0.0;   // |p + 2 hbar k_L>
  double minus = 0.0;  // |p - 2 hbar k_L>
  double weight = 1.0;
};

/// |0.5 - P+| + |0.5 - P-| + |P+ - P-| for one sample.
double bs_cost(double p_plus, double p_minus);

/// Weighted average of the single-sample cost. Weights are normalized
/// internally. Throws InvalidPopulation for populations outside [0, 1] or
/// P+ + P- > 1.
double bs_cost(const std::vector<PortPopulations>& samples);

/// Largest single-sample cost (same validation as bs_cost).
double worst_bs_cost(const std::vector<PortPopulations>& samples);

/// How per-sample costs are combined into the campaign cost.
enum class CostAggregate { Mean, Worst };

inline double oct_bs_efficiency(double cost) noexcept { return 1.0 - cost; }

// ---------------------------------------------------------------------------
// Control variables and problems

/// Gaussian pulse scalars plus detuning parameters: knot values placed
/// uniformly over the evolution window ([0, 2 t0] for t0 > 0) for the knots
/// family, polynomial coefficients for the polynomial family.
struct ControlVariables {
  double omega_r = 2.0;
  double tau = 0.47;
  double t0 = 0.0;
  std::vector<double> knots;
};

enum class DetuningFamily {
  Knots,              // piecewise linear through the knot values
  PolarizationSweep,  // linear_sweep_polarization(tau, t0)
  DopplerSweep,       // linear_sweep_doppler(tau)
  Fixed,              // a user supplied profile
  Polynomial,         // sum_k c_k s^k with s = (t - t0) / tau, clamped
};

/// Piecewise-linear segments used to tabulate a polynomial detuning.
inline constexpr int kPolynomialSegments = 64;

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
};

struct ControlSpace {
  DetuningFamily family = DetuningFamily::Knots;
  std::optional<DetuningProfile> fixed_detuning;
  double detuning_bound = kDefaultDetuningBound;
  int n_max = 2;
  int polynomial_degree = 5;

  PulseEnvelope pulse(const ControlVariables& v) const;
  DetuningProfile detuning(const ControlVariables& v) const;
  TimeWindow window(const ControlVariables& v) const;
};

/// Knot times spread uniformly over the window, both ends included.
std::vector<double> knot_times(TimeWindow window, std::size_t count);

struct EvaluationOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  bool strict_norm = true;  // throw NormDrift instead of accepting the result
};

/// Ports for every sample (same order as `samples`).
std::vector<PortPopulations> evaluate_ports(const ControlSpace& space, const ControlVariables& v,
                                            const std::vector<ErrorSample>& samples,
                                            const EvaluationOptions& options = {});

double evaluate_cost(const ControlSpace& space, const ControlVariables& v, const std::vector<ErrorSample>& samples,
                     const EvaluationOptions& options = {}, CostAggregate aggregate = CostAggregate::Mean);

struct OptimizationProblem {
  ControlSpace space;
  ControlVariables initial;
  std::vector<ControlVariables> extra_starts;  // further seeds (e.g. published triples)
  bool optimize_omega = true;
  bool optimize_tau = true;
  bool optimize_t0 = true;
  Bounds omega_bounds{0.5, 4.0};
  Bounds tau_bounds{0.2, 1.5};
  Bounds t0_bounds{1.0, 6.0};
  /// Reject candidates whose pulse is not essentially zero at t = 0
  /// (t0 < min_t0_over_tau * tau). 0 disables.
  double min_t0_over_tau = 4.0;
  int knot_count = 32;
  SamplingSpec sampling;
  CostAggregate aggregate = CostAggregate::Mean;
  std::size_t budget = 20000;  // cost evaluations
  std::uint64_t seed = 0;
  int restarts = 2;            // random perturbations of the best start
  double search_rtol = 1e-8;   // integrator tolerance inside the loop
  double search_atol = 1e-10;
  double target_cost = 0.0;    // stop early once reached
};

inline constexpr std::size_t kFullSimplexLimit = 10;

struct OptimizationOutcome {
  ControlVariables best;
  double best_cost = 0.0;       // fresh evaluation at the final tolerance
  double efficiency = 0.0;      // 1 - best_cost
  double mean_cost = 0.0;       // sample-averaged cost, whatever the aggregate
  double search_cost = 0.0;     // cost seen by the search for `best`
  std::size_t evaluations = 0;
  bool budget_exhausted = false;
  std::vector<double> cost_trace;  // best-so-far after each iteration
};

using ProgressCallback = std::function<void(std::size_t evaluations, double best_cost)>;

/// Multi-start Nelder-Mead on the pulse scalars (on every variable when there
/// are at most kFullSimplexLimit of them) followed by projected L-BFGS with
/// central finite differences over all variables.
OptimizationOutcome optimize(const OptimizationProblem& problem, const ProgressCallback& progress = {});

/// Throws if a candidate lies outside the scalar bounds.
void check_scalar_bounds(const OptimizationProblem& problem, const ControlVariables& v);

struct EfficiencyPoint {
  double eps = 0.0;
  double p = 0.0;
  double efficiency = 0.0;  // 1 - single-sample cost
  double p_plus = 0.0;
  double p_minus = 0.0;
};

std::vector<EfficiencyPoint> efficiency_map(const ControlSpace& space, const ControlVariables& v,
                                            const std::vector<double>& eps_grid, const std::vector<double>& p_grid,
                                            const EvaluationOptions& options = {});

// JSON forms of campaigns and outcomes.
nlohmann::json to_json(const ControlVariables& v);
ControlVariables control_variables_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SamplingSpec& s);
SamplingSpec sampling_from_json(const nlohmann::json& j);
OptimizationProblem problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OptimizationOutcome& o, const ControlSpace& space);

}  // namespace dbd
