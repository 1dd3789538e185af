#include "dbd/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <regex>

#include "dbd/effective_tls.hpp"
#include "dbd/error.hpp"
#include "parallel.hpp"

namespace dbd {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Tiers

Tier Tier::n_level(int n) {
  if (n < 3 || n % 2 == 0) throw Error(ErrorCode::ConfigError, "n_level tier needs an odd level count >= 3");
  return {n == 5 ? TierKind::FiveLevel : TierKind::NLevel, n};
}

Tier Tier::parse(const std::string& name) {
  if (name == "tls") return tls();
  if (name == "rwa") return rwa();
  if (name == "five_level") return five_level();
  if (name == "exact") return exact();
  static const std::regex re(R"(n_level(?:\((\d+)\)|:(\d+)))");
  std::smatch m;
  if (std::regex_match(name, m, re)) return n_level(std::stoi(m[1].matched ? m[1].str() : m[2].str()));
  throw Error(ErrorCode::ConfigError, "unknown tier '" + name + "'");
}

std::string Tier::name() const {
  switch (kind) {
    case TierKind::Tls: return "tls";
    case TierKind::Rwa: return "rwa";
    case TierKind::FiveLevel: return "five_level";
    case TierKind::NLevel: return "n_level(" + std::to_string(levels) + ")";
    case TierKind::Exact: return "exact";
  }
  return "?";
}

int Tier::n_max() const {
  switch (kind) {
    case TierKind::FiveLevel: return 2;
    case TierKind::NLevel: return (levels - 1) / 2;
    default: return 1;
  }
}

// ---------------------------------------------------------------------------
// Configuration

TimeWindow ScenarioConfig::effective_window() const {
  if (window) return *window;
  const auto [a, b] = pulse.default_window();
  return {a, b};
}

ScenarioConfig scenario_from_json(const json& j) {
  try {
    ScenarioConfig c;
    c.id = j.value("id", c.id);
    if (j.contains("tier")) c.tier = Tier::parse(j.at("tier").get<std::string>());
    if (j.contains("levels")) c.tier = Tier::n_level(j.at("levels").get<int>());
    if (j.contains("pulse")) c.pulse = pulse_from_json(j.at("pulse"));
    if (j.contains("detuning")) c.detuning = detuning_from_json(j.at("detuning"));
    c.eps = j.value("eps", c.eps);
    c.p = j.value("p", c.p);
    c.sigma_p = j.value("sigma_p", c.sigma_p);
    if (j.contains("window")) {
      const auto w = j.at("window").get<std::vector<double>>();
      if (w.size() != 2) throw Error(ErrorCode::ConfigError, "window must be [start, end]");
      c.window = TimeWindow{w[0], w[1]};
    }
    c.dt = j.value("dt", c.dt);
    c.tol = j.value("tol", c.tol);
    c.trajectory_samples = j.value("trajectory_samples", c.trajectory_samples);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out", c.out_dir);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("scenario: ") + e.what());
  }
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["id"] = c.id;
  j["tier"] = c.tier.name();
  j["pulse"] = to_json(c.pulse);
  j["detuning"] = to_json(c.detuning);
  j["eps"] = c.eps;
  j["p"] = c.p;
  j["sigma_p"] = c.sigma_p;
  const auto w = c.effective_window();
  j["window"] = {w.start, w.end};
  j["dt"] = c.dt;
  j["tol"] = c.tol;
  j["trajectory_samples"] = c.trajectory_samples;
  j["seed"] = c.seed;
  j["out"] = c.out_dir;
  return j;
}

void check_tier_support(const Tier& tier, const ScenarioConfig& c) {
  const std::string name = tier.name();
  switch (tier.kind) {
    case TierKind::Tls:
    case TierKind::Rwa:
      if (!c.detuning.is_constant())
        throw Error(ErrorCode::IncompatibleTier, name + " tier needs a constant detuning");
      if (c.p != 0.0) throw Error(ErrorCode::IncompatibleTier, name + " tier is defined at p = 0 only");
      if (tier.kind == TierKind::Rwa && c.pulse.is_gaussian() && c.detuning(0.0) != 0.0)
        throw Error(ErrorCode::IncompatibleTier, "rwa tier handles Gaussian pulses at zero detuning only");
      break;
    case TierKind::Exact:
      if (!(c.sigma_p > 0.0)) throw Error(ErrorCode::IncompatibleTier, "exact tier needs sigma_p > 0");
      break;
    default:
      break;
  }
}

// ---------------------------------------------------------------------------
// Simulation

double SimulationResult::port(int order) const {
  if (std::abs(order) > max_order) return 0.0;
  return populations[order + max_order];
}

namespace {

Eigen::VectorXd orders_from_bins(const std::map<int, double>& bins, int k) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * k + 1);
  for (const auto& [n, w] : bins)
    if (std::abs(n) <= k) out[n + k] = w;
  return out;
}

Eigen::VectorXd split_ports(double p1) {
  Eigen::VectorXd v(3);
  v << 0.5 * p1, 1.0 - p1, 0.5 * p1;
  return v;
}

double rwa_transfer(const ScenarioConfig& c, double t_on) {
  if (c.pulse.is_box()) {
    const double omega = c.pulse.as_box().omega;
    return rabi_population(omega, differential_light_shift(omega, c.detuning(0.0)), t_on);
  }
  const auto& g = c.pulse.as_gaussian();
  return gaussian_pulse_area_population(g.omega_r, g.tau);
}

PropagationOptions few_level_options(const ScenarioConfig& c) {
  PropagationOptions o;
  o.rtol = c.tol;
  o.atol = c.tol * 1e-2;
  o.trajectory_samples = c.trajectory_samples;
  return o;
}

}  // namespace

SimulationResult simulate(const ScenarioConfig& c) {
  check_tier_support(c.tier, c);
  const TimeWindow w = c.effective_window();
  const PolarizationError eps(c.eps);
  SimulationResult out;

  switch (c.tier.kind) {
    case TierKind::Tls: {
      const TlsModel model(c.pulse, c.detuning, eps);
      auto r = propagate_few_level(model, w, few_level_options(c));
      out.max_order = r.max_order;
      out.populations = r.populations;
      out.diagnostics = std::move(r.diagnostics);
      out.trajectory = std::move(r.trajectory);
      break;
    }
    case TierKind::FiveLevel:
    case TierKind::NLevel: {
      auto r = propagate_multilevel(c.p, c.tier.n_max(), c.pulse, c.detuning, eps, w, few_level_options(c));
      out.max_order = r.max_order;
      out.populations = r.populations;
      out.diagnostics = std::move(r.diagnostics);
      out.trajectory = std::move(r.trajectory);
      break;
    }
    case TierKind::Rwa: {
      const double t_on = c.pulse.is_box() ? std::clamp(w.end, 0.0, c.pulse.as_box().tau) - std::max(w.start, 0.0)
                                           : w.length();
      out.max_order = 1;
      out.populations = split_ports(rwa_transfer(c, std::max(t_on, 0.0)));
      if (c.trajectory_samples > 1 && c.pulse.is_box()) {
        for (std::size_t k = 0; k < c.trajectory_samples; ++k) {
          const double t = w.start + w.length() * static_cast<double>(k) / static_cast<double>(c.trajectory_samples - 1);
          const double on = std::clamp(t, 0.0, c.pulse.as_box().tau) - std::max(w.start, 0.0);
          out.trajectory.push_back({t, split_ports(rwa_transfer(c, std::max(on, 0.0))), 1.0});
        }
      }
      break;
    }
    case TierKind::Exact: {
      const MomentumWavepacket packet = gaussian_wavepacket(MomentumGrid{}, c.p, c.sigma_p);
      SplitStepOptions so;
      so.dt = c.dt;
      so.trajectory_samples = c.trajectory_samples;
      so.report_orders = kExactReportOrders;
      auto r = split_step_evolve(c.pulse, c.detuning, eps, packet, w, so);
      out.max_order = kExactReportOrders;
      out.populations = orders_from_bins(bin_populations(r.final_state), kExactReportOrders);
      out.diagnostics = std::move(r.diagnostics);
      out.trajectory = std::move(r.trajectory);
      out.packet = std::move(r.final_state);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scans

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t k = 0; k < n; ++k) v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  if (n > 1) v.back() = hi;
  return v;
}

std::vector<double> arange(double lo, double hi, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "scan step must be > 0");
  std::vector<double> v;
  for (long k = 0;; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    if (x > hi + 0.1 * step) break;
    v.push_back(x);
  }
  return v;
}

ScenarioConfig apply_axis(ScenarioConfig c, const std::string& axis, double value) {
  if (axis == "eps") {
    c.eps = value;
  } else if (axis == "p") {
    c.p = value;
  } else if (axis == "sigma_p") {
    c.sigma_p = value;
  } else if (axis == "delta") {
    c.detuning = DetuningProfile::constant(value, c.detuning.bound());
  } else if (axis == "tau") {
    if (c.pulse.is_box())
      c.pulse = PulseEnvelope::box(c.pulse.as_box().omega, value);
    else
      c.pulse = PulseEnvelope::gaussian(c.pulse.as_gaussian().omega_r, value, c.pulse.as_gaussian().t0);
    c.window.reset();
  } else if (axis == "omega") {
    if (c.pulse.is_box())
      c.pulse = PulseEnvelope::box(value, c.pulse.as_box().tau);
    else
      c.pulse = PulseEnvelope::gaussian(value, c.pulse.as_gaussian().tau, c.pulse.as_gaussian().t0);
  } else if (axis == "t0") {
    if (!c.pulse.is_gaussian()) throw Error(ErrorCode::ConfigError, "t0 axis needs a Gaussian pulse");
    c.pulse = PulseEnvelope::gaussian(c.pulse.as_gaussian().omega_r, c.pulse.as_gaussian().tau, value);
    c.window.reset();
  } else {
    throw Error(ErrorCode::ConfigError, "unknown scan axis '" + axis + "'");
  }
  return c;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void ScanTable::write_csv(std::ostream& os) const {
  for (const auto& a : axes) os << a << ',';
  for (int n = -max_order; n <= max_order; ++n) os << "P" << n << ',';
  os << "dbd_efficiency,oct_bs_efficiency,norm_drift,leakage\n";
  for (const auto& r : rows) {
    for (double x : r.params) os << format_number(x) << ',';
    for (Eigen::Index k = 0; k < r.populations.size(); ++k) os << format_number(r.populations[k]) << ',';
    os << format_number(r.dbd_efficiency) << ',' << format_number(r.oct_bs_efficiency) << ','
       << format_number(r.norm_drift) << ',' << format_number(r.leakage) << '\n';
  }
}

ScanTable run_scan(const ScenarioConfig& c, const std::vector<ScanAxis>& axes) {
  ScanTable table;
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) throw Error(ErrorCode::ConfigError, "scan axis '" + a.name + "' is empty");
    for (double v : a.values)
      if (!std::isfinite(v)) throw Error(ErrorCode::ConfigError, "scan axis '" + a.name + "' has non-finite values");
    table.axes.push_back(a.name);
    total *= a.values.size();
  }
  // Validate the axis names and tier support once before fanning out.
  {
    ScenarioConfig probe = c;
    for (const auto& a : axes) probe = apply_axis(probe, a.name, a.values.front());
    check_tier_support(c.tier, probe);
  }

  table.rows.resize(total);
  std::vector<int> orders(total, 0);
  detail::parallel_for(total, [&](std::size_t i) {
    ScenarioConfig point = c;
    point.trajectory_samples = 0;
    std::vector<double> params(axes.size());
    std::size_t rem = i;
    for (std::size_t k = axes.size(); k-- > 0;) {
      const auto& a = axes[k];
      params[k] = a.values[rem % a.values.size()];
      rem /= a.values.size();
    }
    for (std::size_t k = 0; k < axes.size(); ++k) point = apply_axis(point, axes[k].name, params[k]);
    const SimulationResult r = simulate(point);
    ScanRecord& rec = table.rows[i];
    rec.params = std::move(params);
    rec.populations = r.populations;
    rec.dbd_efficiency = r.dbd_efficiency();
    rec.oct_bs_efficiency = r.oct_bs_efficiency();
    rec.norm_drift = r.diagnostics.norm_drift;
    rec.leakage = r.diagnostics.leakage;
    orders[i] = r.max_order;
  });
  table.max_order = total > 0 ? orders.front() : 0;
  return table;
}

std::vector<Eigen::VectorXd> box_duration_scan(const ScenarioConfig& c, const std::vector<double>& taus) {
  if (!c.pulse.is_box()) throw Error(ErrorCode::ConfigError, "duration scan needs a box pulse");
  if (taus.empty()) return {};
  for (double t : taus)
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::ConfigError, "durations must be finite and >= 0");
  const double t_max = *std::max_element(taus.begin(), taus.end());
  ScenarioConfig run = c;
  run.pulse = PulseEnvelope::box(c.pulse.as_box().omega, std::max(t_max, 1e-300));
  run.window = TimeWindow{0.0, t_max};
  check_tier_support(run.tier, run);
  std::vector<Eigen::VectorXd> out(taus.size());

  if (run.tier.kind == TierKind::Rwa) {
    for (std::size_t k = 0; k < taus.size(); ++k) out[k] = split_ports(rwa_transfer(run, taus[k]));
    return out;
  }

  if (run.tier.kind == TierKind::Exact) {
    // The split-step solver samples uniformly, so uniform grids from 0 run
    // once; anything else falls back to one evolution per duration.
    bool uniform = taus.size() > 1 && taus.front() == 0.0;
    for (std::size_t k = 1; uniform && k < taus.size(); ++k)
      uniform = std::abs(taus[k] - t_max * static_cast<double>(k) / static_cast<double>(taus.size() - 1)) < 1e-9;
    if (uniform) {
      run.trajectory_samples = taus.size();
      const SimulationResult r = simulate(run);
      if (r.trajectory.size() != taus.size())
        throw Error(ErrorCode::ToleranceNotMet, "unexpected trajectory length from the split-step solver");
      for (std::size_t k = 0; k < taus.size(); ++k) out[k] = r.trajectory[k].populations;
      return out;
    }
    detail::parallel_for(taus.size(), [&](std::size_t k) {
      ScenarioConfig one = c;
      one.pulse = PulseEnvelope::box(c.pulse.as_box().omega, taus[k]);
      one.window = TimeWindow{0.0, taus[k]};
      out[k] = simulate(one).populations;
    });
    return out;
  }

  std::vector<double> times(taus);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  PropagationOptions o = few_level_options(run);
  o.trajectory_samples = 0;
  o.sample_times = times;
  FewLevelResult r;
  if (run.tier.kind == TierKind::Tls) {
    const TlsModel model(run.pulse, run.detuning, PolarizationError(run.eps));
    r = propagate_few_level(model, *run.window, o);
  } else {
    r = propagate_multilevel(run.p, run.tier.n_max(), run.pulse, run.detuning, PolarizationError(run.eps),
                             *run.window, o);
  }
  if (r.trajectory.size() != times.size())
    throw Error(ErrorCode::ToleranceNotMet, "unexpected trajectory length from the adaptive integrator");
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const auto it = std::lower_bound(times.begin(), times.end(), taus[k]);
    out[k] = r.trajectory[static_cast<std::size_t>(it - times.begin())].populations;
  }
  return out;
}

FirstCyclePeak first_cycle_peak(const std::function<double(double)>& efficiency, double step, double start,
                                double tau_max) {
  if (!(step > 0.0) || !(start > 0.0)) throw Error(ErrorCode::InvalidArgument, "scan start and step must be > 0");
  FirstCyclePeak best{start, -std::numeric_limits<double>::infinity()};
  for (long k = 0;; ++k) {
    const double tau = start + static_cast<double>(k) * step;
    if (tau > tau_max + 1e-12) break;
    const double e = efficiency(tau);
    if (e > best.efficiency) {
      best = {tau, e};
    } else if (best.efficiency > 0.5 && e < 0.5 * best.efficiency) {
      break;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Tier comparison

json DeviationReport::to_json() const {
  json j;
  j["tier_a"] = tier_a;
  j["tier_b"] = tier_b;
  j["points"] = points;
  j["orders"] = orders;
  j["max_deviation"] = max_deviation;
  j["mean_deviation"] = mean_deviation;
  j["max_target_deviation"] = max_target;
  j["mean_target_deviation"] = mean_target;
  return j;
}

DeviationReport compare_populations(const std::string& name_a, const std::vector<Eigen::VectorXd>& a,
                                    const std::string& name_b, const std::vector<Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "population tables differ in length");
  DeviationReport rep;
  rep.tier_a = name_a;
  rep.tier_b = name_b;
  rep.points = a.size();
  if (a.empty()) return rep;
  int k = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < a.size(); ++i)
    k = std::min({k, static_cast<int>(a[i].size() / 2), static_cast<int>(b[i].size() / 2)});
  for (int n = -k; n <= k; ++n) rep.orders.push_back(n);
  rep.max_deviation.assign(rep.orders.size(), 0.0);
  rep.mean_deviation.assign(rep.orders.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int ka = static_cast<int>(a[i].size() / 2);
    const int kb = static_cast<int>(b[i].size() / 2);
    for (std::size_t m = 0; m < rep.orders.size(); ++m) {
      const int n = rep.orders[m];
      const double d = std::abs(a[i][n + ka] - b[i][n + kb]);
      rep.max_deviation[m] = std::max(rep.max_deviation[m], d);
      rep.mean_deviation[m] += d;
    }
    const double ta = a[i][ka + 1] + a[i][ka - 1];
    const double tb = b[i][kb + 1] + b[i][kb - 1];
    rep.max_target = std::max(rep.max_target, std::abs(ta - tb));
    rep.mean_target += std::abs(ta - tb);
  }
  const double n = static_cast<double>(a.size());
  for (double& m : rep.mean_deviation) m /= n;
  rep.mean_target /= n;
  return rep;
}

DeviationReport validate(const Tier& a, const Tier& b, const ScenarioConfig& c, const std::vector<ScanAxis>& axes) {
  ScenarioConfig ca = c;
  ca.tier = a;
  ScenarioConfig cb = c;
  cb.tier = b;
  std::vector<Eigen::VectorXd> pa;
  std::vector<Eigen::VectorXd> pb;
  if (axes.empty()) {
    pa.push_back(simulate(ca).populations);
    pb.push_back(simulate(cb).populations);
  } else {
    for (const auto& r : run_scan(ca, axes).rows) pa.push_back(r.populations);
    for (const auto& r : run_scan(cb, axes).rows) pb.push_back(r.populations);
  }
  return compare_populations(a.name(), pa, b.name(), pb);
}

}  // namespace dbd
