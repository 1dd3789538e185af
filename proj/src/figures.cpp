// Figure presets: each runs a fixed scenario and writes plot-ready tables
// plus a JSON summary of the headline numbers.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>

#include "dbd/control.hpp"
#include "dbd/effective_tls.hpp"
#include "dbd/error.hpp"
#include "dbd/presets.hpp"
#include "dbd/scenarios.hpp"
#include "parallel.hpp"

namespace dbd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct FigureOutput {
  std::vector<Table> tables;
  json summary;
};

void write_table(const fs::path& path, const Table& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (std::size_t k = 0; k < t.header.size(); ++k) os << (k ? "," : "") << t.header[k];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << format_number(r[k]);
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

double first_order(const Eigen::VectorXd& pops) {
  const auto k = pops.size() / 2;
  return pops[k + 1] + pops[k - 1];
}

double order(const Eigen::VectorXd& pops, int n) {
  const auto k = static_cast<int>(pops.size() / 2);
  return std::abs(n) > k ? 0.0 : pops[n + k];
}

ScenarioConfig base_config(const ReproduceOptions& o, Tier tier) {
  ScenarioConfig c;
  c.tier = tier;
  c.dt = o.dt;
  c.tol = o.tol;
  c.sigma_p = presets::kPlaneWaveSigma;
  return c;
}

ScenarioConfig gaussian_config(const ReproduceOptions& o, Tier tier, presets::GaussianTriple g,
                               DetuningProfile detuning = {}, double eps = 0.0, double p = 0.0) {
  ScenarioConfig c = base_config(o, tier);
  c.pulse = PulseEnvelope::gaussian(g.omega_r, g.tau, g.t0);
  c.detuning = std::move(detuning);
  c.eps = eps;
  c.p = p;
  return c;
}

/// Same stopping rule as first_cycle_peak, applied to a precomputed series.
FirstCyclePeak series_peak(const std::vector<double>& taus, const std::vector<double>& values) {
  FirstCyclePeak best{taus.front(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > best.efficiency)
      best = {taus[i], values[i]};
    else if (best.efficiency > 0.5 && values[i] < 0.5 * best.efficiency)
      break;
  }
  return best;
}

/// First-cycle peak of P(+1) + P(-1) for a Gaussian (omega_r, tau, 0) on the
/// few-level tiers, optionally with a detuning that follows tau.
FirstCyclePeak gaussian_peak(const ReproduceOptions& o, Tier tier, double omega_r, double eps,
                             const std::function<DetuningProfile(double)>& detuning, double step) {
  return first_cycle_peak(
      [&](double tau) {
        ScenarioConfig c = gaussian_config(o, tier, {omega_r, tau, 0.0}, detuning(tau), eps);
        return simulate(c).dbd_efficiency();
      },
      step, step);
}

json peak_json(const FirstCyclePeak& p) { return {{"tau", p.tau}, {"efficiency", p.efficiency}}; }

/// Local maxima above a threshold (interior points only).
std::vector<std::size_t> local_maxima(const std::vector<double>& v, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] >= threshold && v[i] >= v[i - 1] && v[i] > v[i + 1]) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Box-pulse duration scans

struct BoxScan {
  std::vector<double> taus;
  std::vector<Eigen::VectorXd> exact;
  std::vector<Eigen::VectorXd> tls;
  std::vector<Eigen::VectorXd> rwa;
};

BoxScan box_scan(const ReproduceOptions& o, double eps, bool with_rwa) {
  BoxScan s;
  s.taus = arange(0.0, o.quick ? 2.0 : presets::kBoxTauMax, 0.01);
  ScenarioConfig c = base_config(o, Tier::exact());
  c.pulse = PulseEnvelope::box(presets::kBoxOmega, presets::kBoxTauMax);
  c.eps = eps;
  s.exact = box_duration_scan(c, s.taus);
  c.tier = Tier::tls();
  s.tls = box_duration_scan(c, s.taus);
  if (with_rwa) {
    c.tier = Tier::rwa();
    s.rwa = box_duration_scan(c, s.taus);
  }
  return s;
}

FigureOutput fig3(const ReproduceOptions& o) {
  const BoxScan s = box_scan(o, 0.0, true);
  Table t{"fig3", {"tau", "P1_exact", "P1_tls", "P1_rwa", "P1_resonant_area", "P0_exact", "P2_exact"}, {}};
  double max_tls = 0, mean_tls = 0, max_rwa = 0, mean_rwa = 0;
  for (std::size_t k = 0; k < s.taus.size(); ++k) {
    const double ex = first_order(s.exact[k]);
    const double tl = first_order(s.tls[k]);
    const double rw = first_order(s.rwa[k]);
    const double area = rabi_population(presets::kBoxOmega, 0.0, s.taus[k]);
    t.rows.push_back({s.taus[k], ex, tl, rw, area, order(s.exact[k], 0), order(s.exact[k], 2) + order(s.exact[k], -2)});
    max_tls = std::max(max_tls, std::abs(tl - ex));
    max_rwa = std::max(max_rwa, std::abs(rw - ex));
    mean_tls += std::abs(tl - ex);
    mean_rwa += std::abs(rw - ex);
  }
  const double n = static_cast<double>(s.taus.size());
  mean_tls /= n;
  mean_rwa /= n;
  json sum;
  sum["pulse"] = {{"shape", "box"}, {"omega", presets::kBoxOmega}, {"tau_max", s.taus.back()}, {"step", 0.01}};
  sum["tls_vs_exact"] = {{"max", max_tls}, {"mean", mean_tls}};
  sum["rwa_vs_exact"] = {{"max", max_rwa}, {"mean", mean_rwa}};
  sum["rwa_to_tls_mean_ratio"] = mean_tls > 0 ? mean_rwa / mean_tls : kNaN;
  sum["tls_within_0.03"] = max_tls <= presets::kTlsExactMaxDeviation;
  return {{t}, sum};
}

FigureOutput appB(const ReproduceOptions& o) {
  Table t{"appB", {"eps", "tau", "P1_tls", "P1_exact", "P2_exact", "deviation"}, {}};
  json per_eps = json::array();
  for (double eps : {0.0, 0.1, 0.2}) {
    const BoxScan s = box_scan(o, eps, false);
    std::vector<double> dev(s.taus.size());
    std::vector<double> p2(s.taus.size());
    for (std::size_t k = 0; k < s.taus.size(); ++k) {
      const double ex = first_order(s.exact[k]);
      const double tl = first_order(s.tls[k]);
      dev[k] = std::abs(tl - ex);
      p2[k] = order(s.exact[k], 2) + order(s.exact[k], -2);
      t.rows.push_back({eps, s.taus[k], tl, ex, p2[k], dev[k]});
    }
    // Leakage peaks that matter: at least a fifth of the largest one.
    const double p2_max = *std::max_element(p2.begin(), p2.end());
    const auto leak_peaks = local_maxima(p2, std::max(0.2 * p2_max, 1e-3));
    const auto dev_peaks = local_maxima(dev, 0.0);
    std::size_t matched = 0;
    json peaks = json::array();
    for (std::size_t i : leak_peaks) {
      std::size_t best = 0;
      long dist = std::numeric_limits<long>::max();
      for (std::size_t j : dev_peaks) {
        const long d = std::labs(static_cast<long>(j) - static_cast<long>(i));
        if (d < dist) {
          dist = d;
          best = j;
        }
      }
      const bool ok = dist <= 1;
      matched += ok;
      peaks.push_back({{"tau", s.taus[i]}, {"p2", p2[i]}, {"nearest_deviation_peak_tau", s.taus[best]}, {"match", ok}});
    }
    per_eps.push_back({{"eps", eps},
                       {"max_deviation", *std::max_element(dev.begin(), dev.end())},
                       {"max_p2", p2_max},
                       {"leakage_peaks", peaks},
                       {"all_matched", matched == leak_peaks.size()}});
  }
  json sum;
  sum["pulse"] = {{"shape", "box"}, {"omega", presets::kBoxOmega}};
  sum["per_eps"] = per_eps;
  bool all = true;
  for (const auto& e : per_eps) all = all && e["all_matched"].get<bool>();
  sum["leakage_peaks_coincide"] = all;
  return {{t}, sum};
}

// ---------------------------------------------------------------------------
// Gaussian pulses at p = 0

FigureOutput fig4a(const ReproduceOptions& o) {
  const double step = o.quick ? 0.02 : 0.005;
  const auto taus = arange(step, 1.5, step);
  const std::vector<double> eps_list(std::begin(presets::kConstantDetuningEps), std::end(presets::kConstantDetuningEps));
  Table t{"fig4a", {"eps", "tau", "P1_tls", "P1_five_level"}, {}};
  Table tx{"fig4a_exact", {"eps", "tau", "P1_exact"}, {}};
  json per_eps = json::array();
  std::vector<double> five_peaks;
  for (double eps : eps_list) {
    std::vector<double> tls(taus.size()), five(taus.size());
    detail::parallel_for(taus.size(), [&](std::size_t k) {
      const presets::GaussianTriple g{presets::kGaussianBs.omega_r, taus[k], 0.0};
      tls[k] = simulate(gaussian_config(o, Tier::tls(), g, {}, eps)).dbd_efficiency();
      five[k] = simulate(gaussian_config(o, Tier::five_level(), g, {}, eps)).dbd_efficiency();
    });
    for (std::size_t k = 0; k < taus.size(); ++k) t.rows.push_back({eps, taus[k], tls[k], five[k]});
    const auto pt = series_peak(taus, tls);
    const auto pf = series_peak(taus, five);
    five_peaks.push_back(pf.efficiency);
    per_eps.push_back({{"eps", eps}, {"tls_peak", peak_json(pt)}, {"five_level_peak", peak_json(pf)}});
    if (!o.quick) {
      const auto coarse = arange(0.1, 1.0, 0.1);
      std::vector<double> ex(coarse.size());
      detail::parallel_for(coarse.size(), [&](std::size_t k) {
        const presets::GaussianTriple g{presets::kGaussianBs.omega_r, coarse[k], 0.0};
        ex[k] = simulate(gaussian_config(o, Tier::exact(), g, {}, eps)).dbd_efficiency();
      });
      for (std::size_t k = 0; k < coarse.size(); ++k) tx.rows.push_back({eps, coarse[k], ex[k]});
    }
  }
  json sum;
  sum["omega_r"] = presets::kGaussianBs.omega_r;
  sum["per_eps"] = per_eps;
  sum["first_peak_decreases_with_eps"] = std::is_sorted(five_peaks.rbegin(), five_peaks.rend());
  std::vector<Table> tables{t};
  if (!tx.rows.empty()) tables.push_back(tx);
  return {tables, sum};
}

FigureOutput fig4b(const ReproduceOptions& o) {
  const double dstep = o.quick ? 0.05 : 0.01;
  const auto deltas = arange(0.0, 1.5, dstep);
  const std::vector<double> eps_list(std::begin(presets::kConstantDetuningEps), std::end(presets::kConstantDetuningEps));
  Table t{"fig4b",
          {"eps", "delta", "P1_tls_fixed_tau", "P1_five_level_fixed_tau", "peak_tls", "peak_tau_tls", "peak_five_level",
           "peak_tau_five_level"},
          {}};
  json per_eps = json::array();
  const double tau_step = o.quick ? 0.02 : 0.005;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    std::vector<std::array<double, 6>> vals(deltas.size());
    detail::parallel_for(deltas.size(), [&](std::size_t k) {
      const auto det = DetuningProfile::constant(deltas[k]);
      auto fixed = [&](Tier tier) {
        return simulate(gaussian_config(o, tier, presets::kGaussianBs, det, eps)).dbd_efficiency();
      };
      auto follow = [&](double) { return det; };
      const auto pt = gaussian_peak(o, Tier::tls(), presets::kGaussianBs.omega_r, eps, follow, tau_step);
      const auto pf = gaussian_peak(o, Tier::five_level(), presets::kGaussianBs.omega_r, eps, follow, tau_step);
      vals[k] = {fixed(Tier::tls()), fixed(Tier::five_level()), pt.efficiency, pt.tau, pf.efficiency, pf.tau};
    });
    std::size_t bt = 0, bf = 0, xt = 0, xf = 0;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      const auto& v = vals[k];
      t.rows.push_back({eps, deltas[k], v[0], v[1], v[2], v[3], v[4], v[5]});
      if (v[2] > vals[bt][2]) bt = k;
      if (v[4] > vals[bf][4]) bf = k;
      if (v[0] > vals[xt][0]) xt = k;
      if (v[1] > vals[xf][1]) xf = k;
    }
    per_eps.push_back({{"eps", eps},
                       {"reference_delta_opt", presets::kConstantDetuningOptima[e]},
                       {"five_level", {{"delta_opt", deltas[bf]}, {"peak", vals[bf][4]}, {"tau", vals[bf][5]}}},
                       {"tls", {{"delta_opt", deltas[bt]}, {"peak", vals[bt][2]}, {"tau", vals[bt][3]}}},
                       {"fixed_tau_five_level", {{"delta_opt", deltas[xf]}, {"efficiency", vals[xf][1]}}},
                       {"fixed_tau_tls", {{"delta_opt", deltas[xt]}, {"efficiency", vals[xt][0]}}}});
  }
  json sum;
  sum["pulse"] = {{"omega_r", presets::kGaussianBs.omega_r}, {"tau", presets::kGaussianBs.tau}};
  sum["delta_step"] = dstep;
  sum["tau_step"] = tau_step;
  sum["per_eps"] = per_eps;
  return {{t}, sum};
}

/// Linear polarization sweep evaluated at fixed tau and as a first-cycle peak.
struct SweepPoint {
  double fixed = 0.0;
  FirstCyclePeak peak;
};

SweepPoint sweep_point(const ReproduceOptions& o, double eps, double tau_step) {
  SweepPoint s;
  const auto& g = presets::kGaussianBs;
  s.fixed = simulate(gaussian_config(o, Tier::five_level(), g, linear_sweep_polarization(g.tau), eps)).dbd_efficiency();
  s.peak = gaussian_peak(o, Tier::five_level(), g.omega_r, eps,
                         [](double tau) { return linear_sweep_polarization(tau); }, tau_step);
  return s;
}

FigureOutput pol_robustness(const ReproduceOptions& o) {
  const auto eps_list = arange(0.0, 0.12, o.quick ? 0.01 : 0.0025);
  const double tau_step = o.quick ? 0.02 : 0.005;
  std::vector<SweepPoint> pts(eps_list.size());
  detail::parallel_for(eps_list.size(), [&](std::size_t k) { pts[k] = sweep_point(o, eps_list[k], tau_step); });
  Table t{"pol_robustness", {"eps", "ds_fixed_tau", "ds_peak", "ds_peak_tau"}, {}};
  double min_fixed = 1, min_peak = 1;
  std::size_t best_fixed = 0, best_peak = 0;
  double robust_fixed = -1, robust_peak = -1;
  bool fixed_ok = true, peak_ok = true;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const auto& p = pts[k];
    t.rows.push_back({eps_list[k], p.fixed, p.peak.efficiency, p.peak.tau});
    if (eps_list[k] <= presets::kSweepRobustEps + 1e-12) {
      min_fixed = std::min(min_fixed, p.fixed);
      min_peak = std::min(min_peak, p.peak.efficiency);
    }
    if (p.fixed > pts[best_fixed].fixed) best_fixed = k;
    if (p.peak.efficiency > pts[best_peak].peak.efficiency) best_peak = k;
    fixed_ok = fixed_ok && p.fixed >= 0.995;
    peak_ok = peak_ok && p.peak.efficiency >= 0.995;
    if (fixed_ok) robust_fixed = eps_list[k];
    if (peak_ok) robust_peak = eps_list[k];
  }
  json sum;
  sum["pulse"] = {{"omega_r", presets::kGaussianBs.omega_r}, {"tau", presets::kGaussianBs.tau}};
  sum["sweep"] = "(t - t0 + tau) / (2.5 tau)";
  sum["fixed_tau"] = {{"min_efficiency_to_0.085", min_fixed},
                      {"peak_efficiency", pts[best_fixed].fixed},
                      {"peak_eps", eps_list[best_fixed]},
                      {"robust_to_eps", robust_fixed}};
  sum["first_cycle_peak"] = {{"min_efficiency_to_0.085", min_peak},
                             {"peak_efficiency", pts[best_peak].peak.efficiency},
                             {"peak_eps", eps_list[best_peak]},
                             {"robust_to_eps", robust_peak}};
  return {{t}, sum};
}

FigureOutput fig6(const ReproduceOptions& o) {
  const auto eps_list = arange(0.0, 0.3, o.quick ? 0.05 : 0.01);
  const double tau_step = o.quick ? 0.02 : 0.005;
  const double omega = presets::kGaussianBs.omega_r;
  struct Row {
    double dbd, cd, cd_delta, ds;
  };
  std::vector<Row> rows(eps_list.size());
  detail::parallel_for(eps_list.size(), [&](std::size_t k) {
    const double eps = eps_list[k];
    auto constant_peak = [&](double delta) {
      return gaussian_peak(o, Tier::five_level(), omega, eps, [&](double) { return DetuningProfile::constant(delta); },
                           tau_step)
          .efficiency;
    };
    Row r{};
    r.dbd = constant_peak(0.0);
    // Coarse detuning grid, then a local refinement.
    double best_d = 0.0, best = r.dbd;
    for (double d : arange(0.05, 1.5, 0.05)) {
      const double v = constant_peak(d);
      if (v > best) best = v, best_d = d;
    }
    for (double d : arange(best_d - 0.04, best_d + 0.04, 0.01)) {
      if (d < 0) continue;
      const double v = constant_peak(d);
      if (v > best) best = v, best_d = d;
    }
    r.cd = best;
    r.cd_delta = best_d;
    r.ds = gaussian_peak(o, Tier::five_level(), omega, eps, [](double tau) { return linear_sweep_polarization(tau); },
                         tau_step)
               .efficiency;
    rows[k] = r;
  });
  Table t{"fig6", {"eps", "dbd", "cd_dbd", "cd_delta", "ds_dbd"}, {}};
  auto robust = [&](auto get) {
    double last = -1;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (get(rows[k]) < 0.995) break;
      last = eps_list[k];
    }
    return last;
  };
  for (std::size_t k = 0; k < rows.size(); ++k)
    t.rows.push_back({eps_list[k], rows[k].dbd, rows[k].cd, rows[k].cd_delta, rows[k].ds});
  json sum;
  sum["pulse"] = {{"omega_r", omega}};
  sum["robust_to_eps_at_0.995"] = {{"dbd", robust([](const Row& r) { return r.dbd; })},
                                   {"cd_dbd", robust([](const Row& r) { return r.cd; })},
                                   {"ds_dbd", robust([](const Row& r) { return r.ds; })}};
  return {{t}, sum};
}

// ---------------------------------------------------------------------------
// Momentum scans

struct MomentumScan {
  std::vector<double> p;
  std::vector<Eigen::VectorXd> five;
  std::vector<double> p_exact;
  std::vector<Eigen::VectorXd> exact;
};

MomentumScan momentum_scan(const ReproduceOptions& o, const ScenarioConfig& base, double p_max, double step,
                           double exact_step) {
  MomentumScan s;
  s.p = arange(-p_max, p_max, step);
  s.five.resize(s.p.size());
  detail::parallel_for(s.p.size(), [&](std::size_t k) {
    ScenarioConfig c = base;
    c.tier = Tier::five_level();
    c.p = s.p[k];
    s.five[k] = simulate(c).populations;
  });
  if (!o.quick && exact_step > 0) {
    s.p_exact = arange(-p_max, p_max, exact_step);
    s.exact.resize(s.p_exact.size());
    detail::parallel_for(s.p_exact.size(), [&](std::size_t k) {
      ScenarioConfig c = base;
      c.tier = Tier::exact();
      c.p = s.p_exact[k];
      s.exact[k] = simulate(c).populations;
    });
  }
  return s;
}

double slope_at_zero(const ReproduceOptions& o, const ScenarioConfig& base, int port, double h) {
  ScenarioConfig c = base;
  c.tier = Tier::five_level();
  c.p = h;
  const double up = simulate(c).port(port);
  c.p = -h;
  const double down = simulate(c).port(port);
  (void)o;
  return (up - down) / (2 * h);
}

FigureOutput momentum_figure(const std::string& name, const ReproduceOptions& o, const ScenarioConfig& base,
                             double p_max, double step, double exact_step) {
  const MomentumScan s = momentum_scan(o, base, p_max, step, exact_step);
  Table t{name, {"p", "P-1", "P0", "P+1", "P-2", "P+2"}, {}};
  for (std::size_t k = 0; k < s.p.size(); ++k)
    t.rows.push_back({s.p[k], order(s.five[k], -1), order(s.five[k], 0), order(s.five[k], 1), order(s.five[k], -2),
                      order(s.five[k], 2)});
  std::vector<Table> tables{t};
  json sum;
  sum["pulse"] = to_json(base.pulse);
  sum["detuning"] = to_json(base.detuning);
  ScenarioConfig c = base;
  c.tier = Tier::five_level();
  c.p = 0.0;
  sum["loss_at_p0"] = 1.0 - simulate(c).dbd_efficiency();
  json asym = json::array();
  for (double p : {0.2, -0.2}) {
    c.p = p;
    const auto r = simulate(c);
    asym.push_back({{"p", p}, {"P_minus", r.port(-1)}, {"P_plus", r.port(1)}, {"minus_minus_plus", r.port(-1) - r.port(1)}});
  }
  sum["asymmetry"] = asym;
  sum["slope_P_plus_at_0"] = slope_at_zero(o, base, 1, 0.02);
  if (!s.exact.empty()) {
    Table tx{name + "_exact", {"p", "P-1", "P0", "P+1", "P-2", "P+2"}, {}};
    std::vector<Eigen::VectorXd> five_at;
    for (std::size_t k = 0; k < s.p_exact.size(); ++k) {
      tx.rows.push_back({s.p_exact[k], order(s.exact[k], -1), order(s.exact[k], 0), order(s.exact[k], 1),
                         order(s.exact[k], -2), order(s.exact[k], 2)});
      c.p = s.p_exact[k];
      five_at.push_back(simulate(c).populations);
    }
    tables.push_back(tx);
    sum["five_level_vs_exact"] = compare_populations("five_level", five_at, "exact", s.exact).to_json();
  }
  return {tables, sum};
}

FigureOutput fig5(const ReproduceOptions& o) {
  ScenarioConfig c = gaussian_config(o, Tier::five_level(), presets::kGaussianBsDoppler);
  return momentum_figure("fig5", o, c, 0.5, 0.005, 0.05);
}

FigureOutput fig8a(const ReproduceOptions& o) {
  ScenarioConfig c = gaussian_config(o, Tier::five_level(), presets::kGaussianBsDoppler,
                                     DetuningProfile::constant(presets::kDopplerConstantDetuning));
  return momentum_figure("fig8a", o, c, 0.5, 0.005, 0.1);
}

FigureOutput fig8b(const ReproduceOptions& o) {
  ScenarioConfig c = gaussian_config(o, Tier::five_level(), presets::kGaussianBsDoppler,
                                     linear_sweep_doppler(presets::kGaussianBsDoppler.tau));
  return momentum_figure("fig8b", o, c, 0.5, 0.005, 0.1);
}

/// Final momentum density of a Gaussian packet on the exact and five-level
/// tiers, plus port populations from both.
FigureOutput packet_figure(const std::string& name, const ReproduceOptions& o, const ScenarioConfig& base) {
  ScenarioConfig c = base;
  c.tier = Tier::exact();
  const SimulationResult ex = simulate(c);
  const auto w = base.effective_window();
  PropagationOptions po;
  po.rtol = o.tol;
  po.atol = o.tol * 1e-2;
  const MomentumWavepacket five = few_level_wavepacket(base.p, base.sigma_p, 2, base.pulse, base.detuning,
                                                       PolarizationError(base.eps), {w.start, w.end}, 1.0 / 800.0, po);
  const auto& xg = ex.packet->grid;
  std::map<long, double> five_density;
  for (std::size_t k = 0; k < five.amplitudes.size(); ++k)
    five_density[std::lround(five.grid.p(k) / five.grid.dp)] = std::norm(five.amplitudes[k]);
  Table t{name, {"p", "density_exact", "density_five_level"}, {}};
  double max_diff = 0.0;
  for (std::size_t k = 0; k < ex.packet->amplitudes.size(); ++k) {
    const double p = xg.p(k);
    if (std::abs(p) > 3.0) continue;
    const auto it = five_density.find(std::lround(p / xg.dp));
    const double d5 = it == five_density.end() ? 0.0 : it->second;
    const double dx = std::norm(ex.packet->amplitudes[k]);
    max_diff = std::max(max_diff, std::abs(d5 - dx));
    t.rows.push_back({p, dx, d5});
  }
  const auto bins5 = bin_populations(five);
  auto bin = [&](int n) { return bins5.count(n) ? bins5.at(n) : 0.0; };
  json sum;
  sum["pulse"] = to_json(base.pulse);
  sum["p0"] = base.p;
  sum["sigma_p"] = base.sigma_p;
  sum["exact_ports"] = {{"P-1", ex.port(-1)}, {"P0", ex.port(0)}, {"P+1", ex.port(1)}};
  sum["five_level_ports"] = {{"P-1", bin(-1)}, {"P0", bin(0)}, {"P+1", bin(1)}};
  sum["max_density_difference"] = max_diff;
  return {{t}, sum};
}

FigureOutput fig7(const ReproduceOptions& o) {
  ScenarioConfig c = gaussian_config(o, Tier::exact(), presets::kGaussianBsDoppler, {}, 0.0, presets::kWavepacketP0);
  c.sigma_p = presets::kWavepacketSigma;
  FigureOutput out = packet_figure("fig7", o, c);
  const double em = out.summary["exact_ports"]["P-1"], ep = out.summary["exact_ports"]["P+1"];
  const double fm = out.summary["five_level_ports"]["P-1"], fp = out.summary["five_level_ports"]["P+1"];
  out.summary["minus_preferred"] = em > ep && fm > fp;
  return out;
}

FigureOutput appC(const ReproduceOptions& o) {
  ScenarioConfig c = gaussian_config(o, Tier::five_level(), presets::kSelectivityPulse);
  FigureOutput out = momentum_figure("appC", o, c, 0.4, 0.0025, 0.05);
  // Half width at half maximum of P(+1) + P(-1) around p = 0.
  const auto& rows = out.tables.front().rows;
  std::vector<double> p, v;
  for (const auto& r : rows) p.push_back(r[0]), v.push_back(r[1] + r[3]);
  const auto mid = static_cast<std::size_t>(std::min_element(p.begin(), p.end(), [](double a, double b) {
                                              return std::abs(a) < std::abs(b);
                                            }) - p.begin());
  const double half = 0.5 * v[mid];
  auto crossing = [&](int dir) {
    for (std::size_t k = mid; k < p.size() && k + dir < p.size(); k += dir) {
      const std::size_t j = k + dir;
      if (v[j] < half) return p[k] + (p[j] - p[k]) * (v[k] - half) / (v[k] - v[j]);
    }
    return kNaN;
  };
  const double right = crossing(1), left = crossing(-1);
  const double hwhm = 0.5 * (right - left);
  out.summary["acceptance_hwhm"] = hwhm;
  out.summary["acceptance_edges"] = {left, right};
  out.summary["hwhm_near_0.1"] = std::abs(hwhm - presets::kAcceptanceHalfWidth) <= 0.03;
  if (!o.quick) {
    ScenarioConfig pc = c;
    pc.sigma_p = 0.1;
    FigureOutput packet = packet_figure("appC_packet", o, pc);
    out.tables.push_back(packet.tables.front());
    out.summary["packet"] = packet.summary;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimized protocols

struct Protocol {
  ControlSpace space;
  ControlVariables vars;
  json outcome;
};

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

Protocol load_protocol(const ReproduceOptions& o, const std::string& campaign) {
  Protocol pr;
  if (!o.outcome_path.empty()) {
    pr.outcome = read_json(o.outcome_path);
    try {
      pr.vars = control_variables_from_json(pr.outcome.at("variables"));
      pr.space.family = DetuningFamily::Fixed;
      pr.space.fixed_detuning = detuning_from_json(pr.outcome.at("detuning"));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("outcome file: ") + e.what());
    }
    return pr;
  }
  OptimizationProblem problem = problem_from_json(read_json(fs::path(o.campaign_dir) / (campaign + ".json")));
  if (o.seed != 0) problem.seed = o.seed;
  const OptimizationOutcome res = optimize(problem, o.progress);
  pr.space = problem.space;
  pr.vars = res.best;
  pr.outcome = to_json(res, problem.space);
  return pr;
}

std::vector<PortPopulations> protocol_ports(const Protocol& pr, const std::vector<ErrorSample>& samples,
                                            const ReproduceOptions& o) {
  EvaluationOptions eo;
  eo.rtol = o.tol;
  eo.atol = o.tol * 1e-2;
  return evaluate_ports(pr.space, pr.vars, samples, eo);
}

Table map_table(const std::string& name, const std::vector<EfficiencyPoint>& m) {
  Table t{name, {"eps", "p", "efficiency", "P+1", "P-1"}, {}};
  for (const auto& x : m) t.rows.push_back({x.eps, x.p, x.efficiency, x.p_plus, x.p_minus});
  return t;
}

FigureOutput doppler_oct(const ReproduceOptions& o) {
  const Protocol pr = load_protocol(o, "doppler");
  const auto ps = arange(-0.3, 0.3, o.quick ? 0.05 : 0.005);
  std::vector<ErrorSample> samples;
  for (double p : ps) samples.push_back({0.0, p, 1.0});
  const auto ports = protocol_ports(pr, samples, o);
  Table t{"doppler_oct", {"p", "P+1", "P-1", "oct_bs_efficiency"}, {}};
  double min_inner = 1, max_asym = 0;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const double e = 1 - bs_cost(ports[k].plus, ports[k].minus);
    t.rows.push_back({ps[k], ports[k].plus, ports[k].minus, e});
    if (std::abs(ps[k]) <= 0.2 + 1e-12) {
      min_inner = std::min(min_inner, e);
      max_asym = std::max(max_asym, std::abs(ports[k].plus - ports[k].minus));
    }
  }
  json sum;
  sum["protocol"] = pr.outcome;
  sum["mean_cost"] = bs_cost(ports);
  sum["min_efficiency_inner"] = min_inner;
  sum["max_asymmetry_inner"] = max_asym;
  return {{t}, sum};
}

/// p-extent of the contiguous region around p = 0 with efficiency >= level.
double region_extent(const std::vector<EfficiencyPoint>& m, double eps, double level) {
  std::vector<std::pair<double, double>> row;
  for (const auto& x : m)
    if (std::abs(x.eps - eps) < 1e-12) row.emplace_back(x.p, x.efficiency);
  std::sort(row.begin(), row.end());
  if (row.empty()) return 0.0;
  std::size_t c = 0;
  for (std::size_t k = 0; k < row.size(); ++k)
    if (std::abs(row[k].first) < std::abs(row[c].first)) c = k;
  if (row[c].second < level) return 0.0;
  std::size_t lo = c, hi = c;
  while (lo > 0 && row[lo - 1].second >= level) --lo;
  while (hi + 1 < row.size() && row[hi + 1].second >= level) ++hi;
  return row[hi].first - row[lo].first;
}

FigureOutput combined_map(const ReproduceOptions& o) {
  const Protocol pr = load_protocol(o, "combined");
  const auto eps = arange(0.0, 0.12, o.quick ? 0.02 : 0.005);
  const auto ps = arange(-0.3, 0.3, o.quick ? 0.06 : 0.01);
  EvaluationOptions eo;
  eo.rtol = o.tol;
  eo.atol = o.tol * 1e-2;
  const auto oct = efficiency_map(pr.space, pr.vars, eps, ps, eo);
  ControlSpace base;
  base.family = DetuningFamily::DopplerSweep;
  const ControlVariables bv{presets::kGaussianBsDoppler.omega_r, presets::kGaussianBsDoppler.tau, 0.0, {}};
  const auto lin = efficiency_map(base, bv, eps, ps, eo);
  double min_rect = 1.0;
  for (const auto& x : oct)
    if (std::abs(x.p) <= 0.18 + 1e-9 && x.eps <= 0.1 + 1e-9) min_rect = std::min(min_rect, x.efficiency);
  const double ext0 = region_extent(lin, 0.0, 0.95);
  const double ext1 = region_extent(lin, 0.1, 0.95);
  json sum;
  sum["protocol"] = pr.outcome;
  sum["oct_min_efficiency_on_rectangle"] = min_rect;
  sum["rectangle"] = {{"p", {-0.18, 0.18}}, {"eps", {0.0, 0.1}}};
  sum["baseline"] = {{"pulse", to_json(base.pulse(bv))},
                     {"sweep", "(t + 0.9 tau) / (5 tau)"},
                     {"extent_0.95_at_eps_0", ext0},
                     {"extent_0.95_at_eps_0.1", ext1},
                     {"shrinks_with_eps", ext1 < ext0}};
  return {{map_table("combined_map", oct), map_table("combined_map_baseline", lin)}, sum};
}

FigureOutput sigma05(const ReproduceOptions& o) {
  const Protocol pr = load_protocol(o, "sigma05");
  const auto eps = arange(0.0, 0.1, 0.01);
  std::vector<double> nodes, weights;
  gauss_hermite(16, nodes, weights);
  std::vector<ErrorSample> samples;
  for (double e : eps)
    for (std::size_t i = 0; i < nodes.size(); ++i)
      samples.push_back({e, std::sqrt(2.0) * presets::kWavepacketSigma * nodes[i], weights[i] / std::sqrt(std::numbers::pi)});
  const auto ports = protocol_ports(pr, samples, o);
  Table t{"sigma05", {"eps", "summed_population_five_level", "summed_population_exact"}, {}};
  std::vector<double> summed(eps.size(), 0.0);
  for (std::size_t k = 0; k < samples.size(); ++k)
    summed[k / nodes.size()] += samples[k].weight * (ports[k].plus + ports[k].minus);
  std::vector<double> exact(eps.size(), kNaN);
  if (!o.quick) {
    const std::vector<std::size_t> picks{0, eps.size() / 2, eps.size() - 1};
    detail::parallel_for(picks.size(), [&](std::size_t i) {
      ScenarioConfig c = base_config(o, Tier::exact());
      c.pulse = pr.space.pulse(pr.vars);
      c.detuning = pr.space.detuning(pr.vars);
      c.window = pr.space.window(pr.vars);
      c.eps = eps[picks[i]];
      c.sigma_p = presets::kWavepacketSigma;
      exact[picks[i]] = simulate(c).dbd_efficiency();
    });
  }
  double mean = 0.0;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    t.rows.push_back({eps[k], summed[k], exact[k]});
    mean += summed[k];
  }
  mean /= static_cast<double>(eps.size());
  json sum;
  sum["protocol"] = pr.outcome;
  sum["sigma_p"] = presets::kWavepacketSigma;
  sum["mean_summed_population"] = mean;
  sum["min_summed_population"] = *std::min_element(summed.begin(), summed.end());
  return {{t}, sum};
}

using FigureFn = FigureOutput (*)(const ReproduceOptions&);

const std::vector<std::pair<std::string, FigureFn>>& registry() {
  static const std::vector<std::pair<std::string, FigureFn>> r{
      {"fig3", fig3},   {"fig4a", fig4a}, {"fig4b", fig4b},
      {"fig5", fig5},   {"fig6", fig6},   {"fig7", fig7},
      {"fig8a", fig8a}, {"fig8b", fig8b}, {"appB", appB},
      {"appC", appC},   {"pol_robustness", pol_robustness}, {"doppler_oct", doppler_oct},
      {"combined_map", combined_map},     {"sigma05", sigma05},
  };
  return r;
}

}  // namespace

std::vector<std::string> figure_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, fn] : registry()) ids.push_back(id);
  return ids;
}

json reproduce(const std::string& figure, const ReproduceOptions& options) {
  const auto& r = registry();
  const auto it = std::find_if(r.begin(), r.end(), [&](const auto& e) { return e.first == figure; });
  if (it == r.end()) throw Error(ErrorCode::UnknownFigure, "unknown figure '" + figure + "'");
  FigureOutput out = it->second(options);
  out.summary["figure"] = figure;
  out.summary["preset_version"] = presets::kPresetVersion;
  out.summary["quick"] = options.quick;
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + options.out_dir);
  json files = json::array();
  for (const auto& t : out.tables) {
    const fs::path path = fs::path(options.out_dir) / (t.name + ".csv");
    write_table(path, t);
    files.push_back(path.filename().string());
  }
  out.summary["tables"] = files;
  const fs::path spath = fs::path(options.out_dir) / (figure + "_summary.json");
  std::ofstream os(spath, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + spath.string());
  os << out.summary.dump(2) << '\n';
  return out.summary;
}

}  // namespace dbd
