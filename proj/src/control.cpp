#include "dbd/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "dbd/error.hpp"
#include "parallel.hpp"

namespace dbd {

using nlohmann::json;

DetuningProfile linear_sweep_polarization(double tau, double t0) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "sweep width must be > 0");
  return DetuningProfile::linear(1.0 / (2.5 * tau), t0 - tau);
}

DetuningProfile linear_sweep_doppler(double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "sweep width must be > 0");
  return DetuningProfile::linear(1.0 / (5.0 * tau), -0.9 * tau);
}

// ---------------------------------------------------------------------------
// Sampling

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Hermite rule needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(0.5 * k);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
    const double v = solver.eigenvectors()(0, i);
    weights[static_cast<std::size_t>(i)] = sqrt_pi * v * v;
  }
  // Symmetrize: exact for the rule, removes eigen-solver rounding asymmetry.
  for (int i = 0; i < n / 2; ++i) {
    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (nodes[b] - nodes[a]);
    const double w = 0.5 * (weights[a] + weights[b]);
    nodes[a] = -x;
    nodes[b] = x;
    weights[a] = weights[b] = w;
  }
  if (n % 2) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

namespace {

struct AxisPoint {
  double value;
  double weight;
};

std::vector<AxisPoint> axis_points(const AxisSpec& axis, std::uint64_t seed, std::uint64_t stream) {
  if (axis.count < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  if (!std::isfinite(axis.a) || !std::isfinite(axis.b))
    throw Error(ErrorCode::InvalidArgument, "sampling bounds must be finite");
  std::vector<AxisPoint> pts;
  switch (axis.kind) {
    case AxisKind::Fixed:
      pts.push_back({axis.a, 1.0});
      break;
    case AxisKind::Uniform: {
      if (axis.b < axis.a) throw Error(ErrorCode::InvalidArgument, "uniform axis needs min <= max");
      const double w = 1.0 / axis.count;
      const double width = axis.b - axis.a;
      if (axis.count <= kStratifiedLimit) {
        for (int i = 0; i < axis.count; ++i) pts.push_back({axis.a + (i + 0.5) * width / axis.count, w});
      } else {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream)};
        std::mt19937_64 gen(seq);
        for (int i = 0; i < axis.count; ++i) {
          // 53 random bits -> [0, 1); avoids implementation-defined distributions.
          const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
          pts.push_back({axis.a + u * width, w});
        }
      }
      break;
    }
    case AxisKind::Grid: {
      if (axis.b < axis.a) throw Error(ErrorCode::InvalidArgument, "grid axis needs min <= max");
      const double w = 1.0 / axis.count;
      if (axis.count == 1) {
        pts.push_back({0.5 * (axis.a + axis.b), 1.0});
        break;
      }
      for (int i = 0; i < axis.count; ++i) pts.push_back({axis.a + (axis.b - axis.a) * i / (axis.count - 1), w});
      break;
    }
    case AxisKind::Gaussian: {
      if (!(axis.b > 0.0)) throw Error(ErrorCode::InvalidArgument, "Gaussian axis needs sigma > 0");
      std::vector<double> x, w;
      gauss_hermite(axis.count, x, w);
      const double sqrt_pi = std::sqrt(std::numbers::pi);
      for (std::size_t i = 0; i < x.size(); ++i) pts.push_back({axis.a + std::sqrt(2.0) * axis.b * x[i], w[i] / sqrt_pi});
      break;
    }
  }
  return pts;
}

}  // namespace

std::vector<ErrorSample> sample_errors(const SamplingSpec& spec) {
  const auto eps = axis_points(spec.eps, spec.seed, 1);
  const auto ps = axis_points(spec.p, spec.seed, 2);
  std::vector<ErrorSample> out;
  out.reserve(eps.size() * ps.size());
  double total = 0.0;
  for (const auto& e : eps) {
    if (e.value < 0.0 || e.value > 1.0)
      throw Error(ErrorCode::InvalidArgument, "polarization error samples must lie in [0, 1]");
    for (const auto& p : ps) {
      out.push_back({e.value, p.value, e.weight * p.weight});
      total += e.weight * p.weight;
    }
  }
  for (auto& s : out) s.weight /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Cost

double bs_cost(double p_plus, double p_minus) {
  return std::abs(0.5 - p_plus) + std::abs(0.5 - p_minus) + std::abs(p_plus - p_minus);
}

namespace {

void check_ports(const PortPopulations& s) {
  constexpr double slack = 1e-8;
  if (!(s.plus >= -slack && s.plus <= 1.0 + slack) || !(s.minus >= -slack && s.minus <= 1.0 + slack) ||
      s.plus + s.minus > 1.0 + slack)
    throw Error(ErrorCode::InvalidPopulation, "port populations must lie in [0, 1] with P+ + P- <= 1");
  if (!(s.weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sample weights must be >= 0");
}

}  // namespace

double bs_cost(const std::vector<PortPopulations>& samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "cost needs at least one sample");
  double acc = 0.0, wsum = 0.0;
  for (const auto& s : samples) {
    check_ports(s);
    acc += s.weight * bs_cost(s.plus, s.minus);
    wsum += s.weight;
  }
  if (!(wsum > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample weights sum to zero");
  return acc / wsum;
}

double worst_bs_cost(const std::vector<PortPopulations>& samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "cost needs at least one sample");
  double worst = 0.0;
  for (const auto& s : samples) {
    check_ports(s);
    worst = std::max(worst, bs_cost(s.plus, s.minus));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Control space

PulseEnvelope ControlSpace::pulse(const ControlVariables& v) const {
  return PulseEnvelope::gaussian(v.omega_r, v.tau, v.t0);
}

TimeWindow ControlSpace::window(const ControlVariables& v) const {
  const auto [a, b] = pulse(v).default_window();
  return {a, b};
}

std::vector<double> knot_times(TimeWindow window, std::size_t count) {
  std::vector<double> t(count);
  if (count == 1) {
    t[0] = window.start;
    return t;
  }
  for (std::size_t k = 0; k < count; ++k)
    t[k] = window.start + window.length() * static_cast<double>(k) / static_cast<double>(count - 1);
  return t;
}

DetuningProfile ControlSpace::detuning(const ControlVariables& v) const {
  switch (family) {
    case DetuningFamily::Knots: {
      if (v.knots.empty()) return DetuningProfile::constant(0.0, detuning_bound);
      const auto times = knot_times(window(v), v.knots.size());
      std::vector<Knot> knots(v.knots.size());
      for (std::size_t k = 0; k < knots.size(); ++k) knots[k] = {times[k], v.knots[k]};
      if (knots.size() == 1) return DetuningProfile::constant(v.knots[0], detuning_bound);
      return DetuningProfile::piecewise(std::move(knots), detuning_bound);
    }
    case DetuningFamily::PolarizationSweep: {
      const auto s = std::get<LinearDetuning>(linear_sweep_polarization(v.tau, v.t0).shape());
      return DetuningProfile::linear(s.slope, s.t_zero, detuning_bound);
    }
    case DetuningFamily::DopplerSweep: {
      const auto s = std::get<LinearDetuning>(linear_sweep_doppler(v.tau).shape());
      return DetuningProfile::linear(s.slope, s.t_zero, detuning_bound);
    }
    case DetuningFamily::Fixed:
      if (!fixed_detuning) throw Error(ErrorCode::ConfigError, "fixed detuning family needs a profile");
      return *fixed_detuning;
    case DetuningFamily::Polynomial: {
      const auto times = knot_times(window(v), kPolynomialSegments + 1);
      std::vector<Knot> knots(times.size());
      for (std::size_t k = 0; k < times.size(); ++k) {
        const double s = (times[k] - v.t0) / v.tau;
        double d = 0.0;
        for (auto c = v.knots.rbegin(); c != v.knots.rend(); ++c) d = d * s + *c;
        knots[k] = {times[k], std::clamp(d, -detuning_bound, detuning_bound)};
      }
      return DetuningProfile::piecewise(std::move(knots), detuning_bound);
    }
  }
  return DetuningProfile::constant(0.0, detuning_bound);
}

std::vector<PortPopulations> evaluate_ports(const ControlSpace& space, const ControlVariables& v,
                                            const std::vector<ErrorSample>& samples,
                                            const EvaluationOptions& options) {
  const PulseEnvelope pulse = space.pulse(v);
  const DetuningProfile detuning = space.detuning(v);
  const TimeWindow window = space.window(v);
  PropagationOptions popt;
  popt.rtol = options.rtol;
  popt.atol = options.atol;
  popt.throw_on_norm_drift = options.strict_norm;

  std::vector<PortPopulations> out(samples.size());
  detail::parallel_for(samples.size(), [&](std::size_t i) {
    const auto& s = samples[i];
    const auto r = propagate_multilevel(s.p, space.n_max, pulse, detuning, PolarizationError(s.eps), window, popt);
    out[i] = {r.population(1), r.population(-1), s.weight};
  });
  return out;
}

double evaluate_cost(const ControlSpace& space, const ControlVariables& v, const std::vector<ErrorSample>& samples,
                     const EvaluationOptions& options, CostAggregate aggregate) {
  const auto ports = evaluate_ports(space, v, samples, options);
  return aggregate == CostAggregate::Worst ? worst_bs_cost(ports) : bs_cost(ports);
}

std::vector<EfficiencyPoint> efficiency_map(const ControlSpace& space, const ControlVariables& v,
                                            const std::vector<double>& eps_grid, const std::vector<double>& p_grid,
                                            const EvaluationOptions& options) {
  std::vector<ErrorSample> samples;
  for (double e : eps_grid)
    for (double p : p_grid) samples.push_back({e, p, 1.0});
  const auto ports = evaluate_ports(space, v, samples, options);
  std::vector<EfficiencyPoint> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    out[i] = {samples[i].eps, samples[i].p, 1.0 - bs_cost(ports[i].plus, ports[i].minus), ports[i].plus,
              ports[i].minus};
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer

void check_scalar_bounds(const OptimizationProblem& problem, const ControlVariables& v) {
  if (!problem.omega_bounds.contains(v.omega_r) || !problem.tau_bounds.contains(v.tau) ||
      (problem.optimize_t0 && !problem.t0_bounds.contains(v.t0)))
    throw Error(ErrorCode::InvalidArgument, "control variables violate the scalar bounds");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flattens the active variables of a problem into a vector and back.
class Layout {
 public:
  explicit Layout(const OptimizationProblem& p) : prob_(p) {
    if (p.optimize_omega) scalars_.push_back(0);
    if (p.optimize_tau) scalars_.push_back(1);
    if (p.optimize_t0) scalars_.push_back(2);
    knots_ = parameter_count(p);
  }

  static std::size_t parameter_count(const OptimizationProblem& p) {
    if (p.space.family == DetuningFamily::Knots) return static_cast<std::size_t>(p.knot_count);
    if (p.space.family == DetuningFamily::Polynomial) return static_cast<std::size_t>(p.space.polynomial_degree + 1);
    return 0;
  }

  std::size_t scalar_count() const { return scalars_.size(); }
  std::size_t size() const { return scalars_.size() + knots_; }

  Eigen::VectorXd pack(const ControlVariables& v) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(size()));
    Eigen::Index i = 0;
    for (int s : scalars_) x[i++] = scalar(v, s);
    for (std::size_t k = 0; k < knots_; ++k) x[i++] = v.knots[k];
    return x;
  }

  ControlVariables unpack(const Eigen::VectorXd& x, ControlVariables base) const {
    Eigen::Index i = 0;
    for (int s : scalars_) scalar(base, s) = x[i++];
    for (std::size_t k = 0; k < knots_; ++k) base.knots[k] = x[i++];
    return base;
  }

  /// Typical scale of each coordinate for steps and simplices.
  double scale(Eigen::Index i) const {
    if (static_cast<std::size_t>(i) < scalars_.size()) {
      switch (scalars_[static_cast<std::size_t>(i)]) {
        case 0: return 0.1;
        case 1: return 0.03;
        default: return 0.2;
      }
    }
    // Higher polynomial orders act through s^k with |s| up to a few.
    if (prob_.space.family == DetuningFamily::Polynomial)
      return 0.1 / std::pow(2.0, static_cast<double>(static_cast<std::size_t>(i) - scalars_.size()));
    return 0.1;
  }

  bool feasible(const ControlVariables& v) const {
    if (!prob_.omega_bounds.contains(v.omega_r) || !prob_.tau_bounds.contains(v.tau)) return false;
    if (prob_.optimize_t0 && !prob_.t0_bounds.contains(v.t0)) return false;
    if (prob_.min_t0_over_tau > 0.0 && v.t0 > 0.0 && v.t0 < prob_.min_t0_over_tau * v.tau * (1.0 - 1e-12))
      return false;
    return true;
  }

  /// Projection onto the feasible set: box clamps, t0 >= k tau, knot clamps.
  ControlVariables project(ControlVariables v) const {
    if (prob_.optimize_omega) v.omega_r = prob_.omega_bounds.clamp(v.omega_r);
    if (prob_.optimize_tau) v.tau = prob_.tau_bounds.clamp(v.tau);
    if (prob_.optimize_t0) v.t0 = prob_.t0_bounds.clamp(v.t0);
    const double k = prob_.min_t0_over_tau;
    if (k > 0.0 && v.t0 > 0.0 && v.t0 < k * v.tau) {
      if (prob_.optimize_t0 && k * v.tau <= prob_.t0_bounds.hi) {
        v.t0 = k * v.tau;
      } else if (prob_.optimize_tau) {
        v.tau = std::max(prob_.tau_bounds.lo, v.t0 / k);
      }
    }
    if (prob_.space.family == DetuningFamily::Knots) {
      const double b = prob_.space.detuning_bound;
      for (auto& d : v.knots) d = std::clamp(d, -b, b);
    }
    return v;
  }

 private:
  static double& scalar(ControlVariables& v, int s) { return s == 0 ? v.omega_r : (s == 1 ? v.tau : v.t0); }
  static double scalar(const ControlVariables& v, int s) { return s == 0 ? v.omega_r : (s == 1 ? v.tau : v.t0); }

  const OptimizationProblem& prob_;
  std::vector<int> scalars_;
  std::size_t knots_ = 0;
};

class BudgetExceeded {};

class Search {
 public:
  Search(const OptimizationProblem& p, const ProgressCallback& progress)
      : prob_(p), layout_(p), samples_(sample_errors(p.sampling)), progress_(progress) {
    opts_.rtol = p.search_rtol;
    opts_.atol = p.search_atol;
    opts_.strict_norm = false;
  }

  const Layout& layout() const { return layout_; }
  std::size_t evaluations() const { return evals_; }
  double best_cost() const { return best_cost_; }
  const ControlVariables& best() const { return best_; }
  std::vector<double>& trace() { return trace_; }
  bool done() const { return best_cost_ <= prob_.target_cost; }

  // Cost of a candidate; infeasible candidates are rejected with +inf.
  double cost(const ControlVariables& v) {
    if (!layout_.feasible(v)) return kInf;
    if (evals_ >= prob_.budget) throw BudgetExceeded{};
    ++evals_;
    double c;
    try {
      c = evaluate_cost(prob_.space, v, samples_, opts_, prob_.aggregate);
    } catch (const Error& e) {
      if (!is_numerical(e.code())) throw;
      c = kInf;
    }
    if (c < best_cost_) {
      best_cost_ = c;
      best_ = v;
    }
    if (progress_ && evals_ % 50 == 0) progress_(evals_, best_cost_);
    return c;
  }

  void mark() { trace_.push_back(best_cost_); }

  // Nelder-Mead over the scalar coordinates (knots held), or over every
  // coordinate for small layouts.
  ControlVariables nelder_mead(const ControlVariables& start, std::size_t max_evals) {
    const std::size_t ns = layout_.size() <= kFullSimplexLimit ? layout_.size() : layout_.scalar_count();
    if (ns == 0) return start;
    const Eigen::VectorXd full = layout_.pack(start);
    auto make = [&](const Eigen::VectorXd& s) {
      Eigen::VectorXd x = full;
      x.head(static_cast<Eigen::Index>(ns)) = s;
      return layout_.unpack(x, start);
    };
    const auto n = static_cast<Eigen::Index>(ns);
    std::vector<Eigen::VectorXd> simplex(ns + 1, full.head(n));
    std::vector<double> f(ns + 1);
    for (std::size_t i = 1; i <= ns; ++i) simplex[i][static_cast<Eigen::Index>(i - 1)] += layout_.scale(static_cast<Eigen::Index>(i - 1));
    for (std::size_t i = 0; i <= ns; ++i) f[i] = cost(make(simplex[i]));

    const std::size_t stop = evals_ + max_evals;
    std::vector<std::size_t> order(ns + 1);
    while (evals_ < stop && !done()) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[ns - 1];
      if (std::isfinite(f[hi]) && f[hi] - f[lo] < 1e-10) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i <= ns; ++i)
        if (i != hi) centroid += simplex[i];
      centroid /= static_cast<double>(ns);

      const Eigen::VectorXd xr = centroid + (centroid - simplex[hi]);
      const double fr = cost(make(xr));
      if (fr < f[lo]) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[hi]);
        const double fe = cost(make(xe));
        if (fe < fr) {
          simplex[hi] = xe;
          f[hi] = fe;
        } else {
          simplex[hi] = xr;
          f[hi] = fr;
        }
      } else if (fr < f[second]) {
        simplex[hi] = xr;
        f[hi] = fr;
      } else {
        const bool outside = fr < f[hi];
        const Eigen::VectorXd xc =
            outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid)) : Eigen::VectorXd(centroid + 0.5 * (simplex[hi] - centroid));
        const double fc = cost(make(xc));
        if (fc < (outside ? fr : f[hi])) {
          simplex[hi] = xc;
          f[hi] = fc;
        } else {
          for (std::size_t i = 0; i <= ns; ++i) {
            if (i == lo) continue;
            simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
            f[i] = cost(make(simplex[i]));
          }
        }
      }
      mark();
    }
    const auto best = std::min_element(f.begin(), f.end()) - f.begin();
    return make(simplex[static_cast<std::size_t>(best)]);
  }

  // Central finite-difference gradient at a feasible point (one-sided at
  // active bounds).
  Eigen::VectorXd gradient(const ControlVariables& v, double fv) {
    const Eigen::VectorXd x = layout_.pack(v);
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = 1e-3 * layout_.scale(i) * 10.0;
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const auto vp = layout_.unpack(xp, v), vm = layout_.unpack(xm, v);
      const bool okp = layout_.feasible(vp) && layout_.project(vp).knots == vp.knots;
      const bool okm = layout_.feasible(vm) && layout_.project(vm).knots == vm.knots;
      if (okp && okm) {
        g[i] = (cost(vp) - cost(vm)) / (2.0 * h);
      } else if (okp) {
        g[i] = (cost(vp) - fv) / h;
      } else if (okm) {
        g[i] = (fv - cost(vm)) / h;
      } else {
        g[i] = 0.0;
      }
      if (!std::isfinite(g[i])) g[i] = 0.0;
    }
    return g;
  }

  // Projected L-BFGS with backtracking.
  ControlVariables lbfgs(ControlVariables v, std::size_t max_iters) {
    constexpr std::size_t memory = 8;
    v = layout_.project(v);
    double f = cost(v);
    if (!std::isfinite(f)) return v;
    Eigen::VectorXd x = layout_.pack(v);
    Eigen::VectorXd g = gradient(v, f);
    std::vector<Eigen::VectorXd> S, Y;
    double step_scale = 1.0;

    for (std::size_t it = 0; it < max_iters && !done(); ++it) {
      // Two-loop recursion.
      Eigen::VectorXd q = g;
      std::vector<double> alpha(S.size());
      for (std::size_t k = S.size(); k-- > 0;) {
        alpha[k] = S[k].dot(q) / Y[k].dot(S[k]);
        q -= alpha[k] * Y[k];
      }
      if (!S.empty()) {
        q *= S.back().dot(Y.back()) / Y.back().dot(Y.back());
      } else {
        // First step: move the largest coordinate by ~ its scale.
        Eigen::VectorXd scaled(q.size());
        for (Eigen::Index i = 0; i < q.size(); ++i) scaled[i] = q[i] / layout_.scale(i);
        const double m = scaled.cwiseAbs().maxCoeff();
        if (m == 0.0) break;
        q *= 0.5 * step_scale / m;
      }
      for (std::size_t k = 0; k < S.size(); ++k) {
        const double beta = Y[k].dot(q) / Y[k].dot(S[k]);
        q += S[k] * (alpha[k] - beta);
      }
      Eigen::VectorXd d = -q;
      if (d.dot(g) >= 0.0) {
        S.clear();
        Y.clear();
        continue;
      }

      bool accepted = false;
      double a = 1.0;
      Eigen::VectorXd x_new;
      ControlVariables v_new;
      double f_new = kInf;
      for (int ls = 0; ls < 12; ++ls, a *= 0.4) {
        v_new = layout_.project(layout_.unpack(x + a * d, v));
        x_new = layout_.pack(v_new);
        f_new = cost(v_new);
        if (f_new < f - 1e-4 * std::abs(g.dot(x_new - x))) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (S.empty()) {
          step_scale *= 0.1;
          if (step_scale < 1e-4) break;
        }
        S.clear();
        Y.clear();
        continue;
      }
      const Eigen::VectorXd g_new = gradient(v_new, f_new);
      const Eigen::VectorXd s = x_new - x, y = g_new - g;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        S.push_back(s);
        Y.push_back(y);
        if (S.size() > memory) {
          S.erase(S.begin());
          Y.erase(Y.begin());
        }
      }
      const double improvement = f - f_new;
      x = x_new;
      v = v_new;
      f = f_new;
      g = g_new;
      mark();
      if (improvement < 1e-9 * std::max(1e-6, std::abs(f)) && improvement < 1e-11) break;
    }
    return v;
  }

 private:
  const OptimizationProblem& prob_;
  Layout layout_;
  std::vector<ErrorSample> samples_;
  EvaluationOptions opts_;
  const ProgressCallback& progress_;
  std::size_t evals_ = 0;
  double best_cost_ = kInf;
  ControlVariables best_;
  std::vector<double> trace_;
};

ControlVariables prepare_start(const OptimizationProblem& p, ControlVariables v) {
  if (p.space.family == DetuningFamily::Polynomial) {
    v.knots.resize(static_cast<std::size_t>(p.space.polynomial_degree + 1), 0.0);
  } else if (p.space.family == DetuningFamily::Knots) {
    const auto k = static_cast<std::size_t>(p.knot_count);
    if (v.knots.size() != k) {
      // Resample whatever profile the seed describes onto the knot grid.
      ControlSpace space = p.space;
      const DetuningProfile prof = v.knots.empty() ? DetuningProfile::constant(0.0) : space.detuning(v);
      const auto times = knot_times(space.window(v), k);
      v.knots.resize(k);
      for (std::size_t i = 0; i < k; ++i) v.knots[i] = prof(times[i]);
    }
  } else {
    v.knots.clear();
  }
  return v;
}

}  // namespace

OptimizationOutcome optimize(const OptimizationProblem& problem, const ProgressCallback& progress) {
  if (problem.budget < 100) throw Error(ErrorCode::InvalidArgument, "optimization budget must be >= 100 evaluations");
  if (problem.space.family == DetuningFamily::Knots && problem.knot_count < 2)
    throw Error(ErrorCode::InvalidArgument, "knot family needs at least two knots");
  if (problem.space.family == DetuningFamily::Polynomial && problem.space.polynomial_degree < 0)
    throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 0");

  Search search(problem, progress);
  OptimizationOutcome out;

  std::vector<ControlVariables> starts{prepare_start(problem, problem.initial)};
  for (const auto& s : problem.extra_starts) starts.push_back(prepare_start(problem, s));

  try {
    // Scalars first from every start, then the full gradient search from the
    // best of them, then perturbed restarts around the incumbent.
    const std::size_t nm_evals = std::max<std::size_t>(40, problem.budget / (10 * starts.size()));
    for (auto& s : starts) {
      s = search.layout().project(s);
      if (search.done()) break;
      search.nelder_mead(s, nm_evals);
    }
    // Fresh simplices around the incumbent until the simplex search stalls.
    auto polish = [&] {
      if (search.layout().size() > kFullSimplexLimit) return;
      for (double prev = kInf; !search.done() && prev - search.best_cost() > 1e-7;) {
        prev = search.best_cost();
        search.nelder_mead(search.best(), nm_evals);
      }
    };
    polish();
    ControlVariables incumbent = search.best();
    search.lbfgs(incumbent, 10000);

    std::mt19937_64 rng(problem.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < problem.restarts && !search.done(); ++r) {
      ControlVariables v = search.best();
      Eigen::VectorXd x = search.layout().pack(v);
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += 0.5 * search.layout().scale(i) * gauss(rng);
      v = search.layout().project(search.layout().unpack(x, v));
      search.nelder_mead(v, nm_evals);
      polish();
      search.lbfgs(search.best(), 10000);
    }
  } catch (const BudgetExceeded&) {
    out.budget_exhausted = true;
  }

  if (!std::isfinite(search.best_cost()))
    throw Error(ErrorCode::ToleranceNotMet, "no feasible candidate could be evaluated");

  out.best = search.best();
  out.search_cost = search.best_cost();
  out.evaluations = search.evaluations();
  out.cost_trace = search.trace();
  const auto ports = evaluate_ports(problem.space, out.best, sample_errors(problem.sampling));
  out.mean_cost = bs_cost(ports);
  out.best_cost = problem.aggregate == CostAggregate::Worst ? worst_bs_cost(ports) : out.mean_cost;
  out.efficiency = oct_bs_efficiency(out.best_cost);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const ControlVariables& v) {
  return json{{"omega_r", v.omega_r}, {"tau", v.tau}, {"t0", v.t0}, {"knots", v.knots}};
}

ControlVariables control_variables_from_json(const json& j) {
  try {
    ControlVariables v;
    v.omega_r = j.at("omega_r").get<double>();
    v.tau = j.at("tau").get<double>();
    v.t0 = j.value("t0", 0.0);
    if (j.contains("knots")) v.knots = j.at("knots").get<std::vector<double>>();
    return v;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("control variables: ") + e.what());
  }
}

namespace {

json axis_to_json(const AxisSpec& a) {
  switch (a.kind) {
    case AxisKind::Fixed: return json{{"kind", "fixed"}, {"value", a.a}};
    case AxisKind::Uniform: return json{{"kind", "uniform"}, {"min", a.a}, {"max", a.b}, {"count", a.count}};
    case AxisKind::Gaussian: return json{{"kind", "gaussian"}, {"mean", a.a}, {"sigma", a.b}, {"count", a.count}};
    case AxisKind::Grid: return json{{"kind", "grid"}, {"min", a.a}, {"max", a.b}, {"count", a.count}};
  }
  return {};
}

AxisSpec axis_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "fixed") return AxisSpec::fixed(j.at("value").get<double>());
  if (kind == "uniform")
    return AxisSpec::uniform(j.at("min").get<double>(), j.at("max").get<double>(), j.at("count").get<int>());
  if (kind == "gaussian")
    return AxisSpec::gaussian(j.at("mean").get<double>(), j.at("sigma").get<double>(), j.at("count").get<int>());
  if (kind == "grid")
    return AxisSpec::grid(j.at("min").get<double>(), j.at("max").get<double>(), j.at("count").get<int>());
  throw Error(ErrorCode::ConfigError, "unknown sampling axis kind '" + kind + "'");
}

Bounds bounds_from_json(const json& j, Bounds fallback) {
  if (j.is_null()) return fallback;
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2 || !(v[0] <= v[1])) throw Error(ErrorCode::ConfigError, "bounds must be [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

DetuningFamily family_from_string(const std::string& s) {
  if (s == "knots") return DetuningFamily::Knots;
  if (s == "polarization_sweep") return DetuningFamily::PolarizationSweep;
  if (s == "doppler_sweep") return DetuningFamily::DopplerSweep;
  if (s == "fixed") return DetuningFamily::Fixed;
  if (s == "polynomial") return DetuningFamily::Polynomial;
  throw Error(ErrorCode::ConfigError, "unknown detuning family '" + s + "'");
}

const char* family_name(DetuningFamily f) {
  switch (f) {
    case DetuningFamily::Knots: return "knots";
    case DetuningFamily::PolarizationSweep: return "polarization_sweep";
    case DetuningFamily::DopplerSweep: return "doppler_sweep";
    case DetuningFamily::Fixed: return "fixed";
    case DetuningFamily::Polynomial: return "polynomial";
  }
  return "knots";
}

}  // namespace

json to_json(const SamplingSpec& s) {
  return json{{"eps", axis_to_json(s.eps)}, {"p", axis_to_json(s.p)}, {"seed", s.seed}};
}

SamplingSpec sampling_from_json(const json& j) {
  try {
    SamplingSpec s;
    if (j.contains("eps")) s.eps = axis_from_json(j.at("eps"));
    if (j.contains("p")) s.p = axis_from_json(j.at("p"));
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("sampling: ") + e.what());
  }
}

OptimizationProblem problem_from_json(const json& j) {
  try {
    OptimizationProblem p;
    p.space.family = family_from_string(j.value("family", std::string("knots")));
    if (j.contains("fixed_detuning")) p.space.fixed_detuning = detuning_from_json(j.at("fixed_detuning"));
    p.space.detuning_bound = j.value("detuning_bound", kDefaultDetuningBound);
    p.space.n_max = j.value("n_max", 2);
    p.knot_count = j.value("knot_count", 32);
    p.space.polynomial_degree = j.value("polynomial_degree", p.space.polynomial_degree);
    const std::string agg = j.value("aggregate", std::string("mean"));
    if (agg == "mean") {
      p.aggregate = CostAggregate::Mean;
    } else if (agg == "worst") {
      p.aggregate = CostAggregate::Worst;
    } else {
      throw Error(ErrorCode::ConfigError, "aggregate must be 'mean' or 'worst'");
    }
    p.initial = control_variables_from_json(j.at("initial"));
    if (j.contains("initial_detuning") && p.space.family == DetuningFamily::Knots && p.initial.knots.empty()) {
      const DetuningProfile prof = detuning_from_json(j.at("initial_detuning"));
      const auto times = knot_times(p.space.window(p.initial), static_cast<std::size_t>(p.knot_count));
      for (double t : times) p.initial.knots.push_back(prof(t));
    }
    if (j.contains("starts"))
      for (const auto& s : j.at("starts")) p.extra_starts.push_back(control_variables_from_json(s));
    if (j.contains("optimize")) {
      const auto& o = j.at("optimize");
      p.optimize_omega = o.value("omega_r", true);
      p.optimize_tau = o.value("tau", true);
      p.optimize_t0 = o.value("t0", true);
    }
    if (j.contains("bounds")) {
      const auto& b = j.at("bounds");
      p.omega_bounds = bounds_from_json(b.value("omega_r", json()), p.omega_bounds);
      p.tau_bounds = bounds_from_json(b.value("tau", json()), p.tau_bounds);
      p.t0_bounds = bounds_from_json(b.value("t0", json()), p.t0_bounds);
    }
    p.min_t0_over_tau = j.value("min_t0_over_tau", p.min_t0_over_tau);
    if (j.contains("sampling")) p.sampling = sampling_from_json(j.at("sampling"));
    p.budget = j.value("budget", p.budget);
    p.seed = j.value("seed", p.seed);
    p.restarts = j.value("restarts", p.restarts);
    p.search_rtol = j.value("search_rtol", p.search_rtol);
    p.search_atol = j.value("search_atol", p.search_atol);
    p.target_cost = j.value("target_cost", p.target_cost);
    if (p.space.n_max < 1) throw Error(ErrorCode::ConfigError, "n_max must be >= 1");
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("campaign: ") + e.what());
  }
}

json to_json(const OptimizationOutcome& o, const ControlSpace& space) {
  json j;
  j["family"] = family_name(space.family);
  j["variables"] = to_json(o.best);
  j["pulse"] = to_json(space.pulse(o.best));
  j["detuning"] = to_json(space.detuning(o.best));
  const auto w = space.window(o.best);
  j["window"] = {w.start, w.end};
  j["best_cost"] = o.best_cost;
  j["mean_cost"] = o.mean_cost;
  j["oct_bs_efficiency"] = o.efficiency;
  j["search_cost"] = o.search_cost;
  j["evaluations"] = o.evaluations;
  j["budget_exhausted"] = o.budget_exhausted;
  j["cost_trace"] = o.cost_trace;
  return j;
}

}  // namespace dbd
