// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance [--campaigns DIR] [--out DIR] [--only 1,4,7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbd/control.hpp"
#include "dbd/effective_tls.hpp"
#include "dbd/error.hpp"
#include "dbd/multilevel.hpp"
#include "dbd/presets.hpp"
#include "dbd/propagators.hpp"
#include "dbd/pulse.hpp"
#include "dbd/scenarios.hpp"
#include "dbd/units.hpp"

using namespace dbd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Context {
  std::string campaigns;
  std::string out;
  // Shared between criteria 1 and 2.
  json fig3;

  ReproduceOptions options(const std::string& sub) const {
    ReproduceOptions o;
    o.out_dir = (fs::path(out) / sub).string();
    o.campaign_dir = campaigns;
    fs::create_directories(o.out_dir);
    return o;
  }
  const json& fig3_summary() {
    if (fig3.is_null()) fig3 = reproduce("fig3", options("fig3"));
    return fig3;
  }
};

ScenarioConfig gaussian(double omega_r, double tau, DetuningProfile det, double eps = 0.0, double p = 0.0) {
  ScenarioConfig c;
  c.tier = Tier::five_level();
  c.pulse = PulseEnvelope::gaussian(omega_r, tau, 0.0);
  c.detuning = std::move(det);
  c.eps = eps;
  c.p = p;
  return c;
}

// 1. TLS vs exact on the box scan.
Verdict tls_vs_exact(Context& cx) {
  const auto& s = cx.fig3_summary();
  const double m = s["tls_vs_exact"]["max"];
  return {m <= 0.03, "max |P_tls - P_exact| = " + fmt("%.4f", m) + " (limit 0.03), mean " +
                         fmt("%.4f", s["tls_vs_exact"]["mean"].get<double>())};
}

// 2. RWA mean deviation more than twice the TLS one.
Verdict rwa_inadequacy(Context& cx) {
  const auto& s = cx.fig3_summary();
  const double r = s["tls_vs_exact"]["mean"], w = s["rwa_vs_exact"]["mean"];
  return {w > 2 * r, "mean deviation RWA " + fmt("%.4f", w) + " vs TLS " + fmt("%.4f", r)};
}

// 3. Constant-detuning optima of the first Rabi cycle.
Verdict constant_detuning(Context& cx) {
  const json s = reproduce("fig4b", cx.options("fig4b"));
  bool ok = true;
  std::string d;
  for (const auto& e : s["per_eps"]) {
    const double opt = e["five_level"]["delta_opt"], peak = e["five_level"]["peak"];
    const double ref = e["reference_delta_opt"];
    const bool good = std::abs(opt - ref) <= 0.05 + 1e-9 && peak >= 0.999;
    ok = ok && good;
    d += "eps " + fmt("%.1f", e["eps"].get<double>()) + ": delta " + fmt("%.2f", opt) + " (ref " + fmt("%.2f", ref) +
         ") peak " + fmt("%.5f", peak) + (good ? "" : " *") + "; ";
  }
  return {ok, d};
}

// 4. Linear polarization sweep robustness.
Verdict sweep_robustness(Context& cx) {
  const json s = reproduce("pol_robustness", cx.options("pol_robustness"));
  const auto& f = s["fixed_tau"];
  const double mn = f["min_efficiency_to_0.085"], pk = f["peak_efficiency"], pe = f["peak_eps"];
  const bool ok = mn >= 0.995 && std::abs(pk - 0.99976) <= 5e-4 && std::abs(pe - 0.045) <= 0.01 + 1e-9;
  return {ok, "min over eps <= 0.085: " + fmt("%.5f", mn) + ", peak " + fmt("%.5f", pk) + " at eps " + fmt("%.4f", pe)};
}

OptimizationOutcome run_campaign(const Context& cx, const std::string& name, OptimizationProblem& prob) {
  std::ifstream is(fs::path(cx.campaigns) / (name + ".json"));
  if (!is) throw Error(ErrorCode::ConfigError, "missing campaign " + name);
  prob = problem_from_json(json::parse(is));
  auto res = optimize(prob);
  std::ofstream os(fs::path(cx.out) / (name + "_outcome.json"));
  os << to_json(res, prob.space).dump(2) << '\n';
  return res;
}

// 5. Re-optimized polarization protocol.
Verdict polarization_campaign(Context& cx) {
  OptimizationProblem prob;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_campaign(cx, "polarization", prob);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;

  const auto eps = arange(0.0, 0.1, 0.005);
  std::vector<ErrorSample> samples;
  for (double e : eps) samples.push_back({e, 0.0, 1.0});
  const auto ports = evaluate_ports(prob.space, res.best, samples);
  double mean = 0.0;
  for (const auto& p : ports) mean += p.plus + p.minus;
  mean /= static_cast<double>(ports.size());

  double worst_cross = 0.0;
  for (std::size_t k : {std::size_t{0}, eps.size() / 2, eps.size() - 1}) {
    ScenarioConfig c;
    c.tier = Tier::exact();
    c.pulse = prob.space.pulse(res.best);
    c.detuning = prob.space.detuning(res.best);
    c.window = prob.space.window(res.best);
    c.eps = eps[k];
    const double ex = simulate(c).dbd_efficiency();
    worst_cross = std::max(worst_cross, std::abs(ex - (ports[k].plus + ports[k].minus)));
  }
  const bool ok = mean >= 0.998 && worst_cross <= 5e-4 && minutes <= 30;
  return {ok, "mean port population " + fmt("%.6f", mean) + ", exact cross-check " + fmt("%.2e", worst_cross) +
                  ", campaign " + fmt("%.1f", minutes) + " min"};
}

// 6. Doppler asymmetry sign.
Verdict doppler_sign(Context&) {
  std::string d;
  bool ok = true;
  for (const Tier& tier : {Tier::five_level(), Tier::exact()}) {
    auto c = gaussian(2.0, 0.45, DetuningProfile::constant(0.0));
    c.tier = tier;
    c.p = 0.2;
    const auto a = simulate(c);
    c.p = -0.2;
    const auto b = simulate(c);
    const double da = a.port(-1) - a.port(1), db = b.port(-1) - b.port(1);
    ok = ok && da > 0.05 && db < 0.0;
    d += tier.name() + ": P(-2)-P(+2) = " + fmt("%.4f", da) + " at p=+0.2, " + fmt("%.4f", db) + " at p=-0.2; ";
  }
  return {ok, d};
}

// 7. Doppler linear sweep flattens P(+2) around p = 0.
Verdict doppler_sweep(Context&) {
  const double tau = 0.45;
  const auto det = DetuningProfile::linear(1.0 / (5 * tau), -0.9 * tau);
  const double hi = simulate(gaussian(2.0, tau, det, 0.0, 0.02)).port(1);
  const double lo = simulate(gaussian(2.0, tau, det, 0.0, -0.02)).port(1);
  const double slope = (hi - lo) / 0.04;
  return {std::abs(slope) < 0.05, "dP(+2)/dp at 0 = " + fmt("%.4f", slope) + " (limit 0.05)"};
}

// 8. Combined protocol on the full rectangle.
Verdict combined_map(Context& cx) {
  const auto t0 = std::chrono::steady_clock::now();
  const json s = reproduce("combined_map", cx.options("combined_map"));
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;
  const double mn = s["oct_min_efficiency_on_rectangle"];
  const auto& b = s["baseline"];
  const bool ok = mn >= 0.99 && b["shrinks_with_eps"].get<bool>() && minutes <= 70;
  return {ok, "min OCT efficiency on rectangle " + fmt("%.5f", mn) + "; baseline 0.95 extent " +
                  fmt("%.3f", b["extent_0.95_at_eps_0"].get<double>()) + " -> " +
                  fmt("%.3f", b["extent_0.95_at_eps_0.1"].get<double>()) + "; " + fmt("%.1f", minutes) + " min"};
}

// 9. Finite-width packet protocol.
Verdict finite_width(Context& cx) {
  const auto t0 = std::chrono::steady_clock::now();
  const json s = reproduce("sigma05", cx.options("sigma05"));
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;
  const double mean = s["mean_summed_population"];
  return {mean >= 0.998 && minutes <= 60,
          "mean summed population " + fmt("%.5f", mean) + " at sigma_p 0.05; " + fmt("%.1f", minutes) + " min"};
}

// 10. Property suites.
Verdict properties(Context&) {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Unitarity.
  double drift = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto pulse = PulseEnvelope::gaussian(0.5 + 3 * u(rng), 0.3 + 0.5 * u(rng), 0.0);
    const auto w = pulse.default_window();
    const auto r = propagate_multilevel(0.6 * u(rng) - 0.3, 1 + static_cast<int>(3 * u(rng)), pulse,
                                        DetuningProfile::linear(u(rng), -0.2), PolarizationError(0.2 * u(rng)),
                                        {w.first, w.second});
    drift = std::max(drift, r.diagnostics.norm_drift);
  }
  expect(drift < 1e-8, "few-level norm drift " + fmt("%.1e", drift));

  // Hermiticity.
  double herm = 0.0;
  for (int i = 0; i < 200; ++i) {
    const MomentumBasis b(2 * u(rng) - 1, 1 + static_cast<int>(4 * u(rng)));
    const double om = 4 * u(rng), c = 2.4 * u(rng) - 1.2, t = 10 * u(rng);
    const auto lab = build_lab_hamiltonian(b, om, c, t);
    const auto in = build_interaction_hamiltonian(b, om, c, t);
    const auto tls = build_tls_hamiltonian(om, u(rng) - 0.5, PolarizationError(0.3 * u(rng)), t);
    herm = std::max({herm, (lab - lab.adjoint()).norm(), (in - in.adjoint()).norm(), (tls - tls.adjoint()).norm()});
  }
  expect(herm < 1e-12, "Hermiticity residual " + fmt("%.1e", herm));

  // Parity decoupling at p = 0 and picture equivalence.
  const auto pulse = PulseEnvelope::gaussian(2.0, 0.47, 0.0);
  const auto w = pulse.default_window();
  const TimeWindow win{w.first, w.second};
  {
    const MultilevelModel model(MomentumBasis(0.0, 2), pulse, DetuningProfile::constant(0.25), PolarizationError(0.1));
    const auto r = propagate_few_level(model, win);
    const double anti = std::norm(r.final_state.amplitudes[2]) + std::norm(r.final_state.amplitudes[4]);
    expect(anti < 1e-8, "parity leakage " + fmt("%.1e", anti));
  }
  double pic = 0.0;
  for (double p : {0.0, 0.2, -0.17}) {
    const auto det = DetuningProfile::linear(0.3, -0.4);
    const auto a = propagate_multilevel(p, 2, pulse, det, PolarizationError(0.08), win, {}, Picture::Lab);
    const auto b = propagate_multilevel(p, 2, pulse, det, PolarizationError(0.08), win, {}, Picture::Interaction);
    pic = std::max(pic, (a.populations - b.populations).cwiseAbs().maxCoeff());
  }
  expect(pic < 1e-8, "lab vs interaction " + fmt("%.1e", pic));

  // Split-step self-convergence.
  {
    const auto sp = PulseEnvelope::gaussian(2.0, 0.2, 0.0);
    const auto packet = gaussian_wavepacket(MomentumGrid{}, 0.0, 0.01);
    auto run = [&](double dt) {
      SplitStepOptions o;
      o.dt = dt;
      return split_step_evolve(sp, DetuningProfile::linear(0.5, -0.2), PolarizationError(0.05), packet, {-1.0, 1.0}, o);
    };
    auto dist = [](const MomentumWavepacket& a, const MomentumWavepacket& b) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.amplitudes.size(); ++k) s += std::norm(a.amplitudes[k] - b.amplitudes[k]);
      return std::sqrt(s * a.grid.dp);
    };
    const auto ref = run(0.0025), a = run(0.02), b = run(0.01);
    const double ratio = dist(a.final_state, ref.final_state) / dist(b.final_state, ref.final_state);
    expect(std::abs(ratio - 4.0) <= 0.5, "split-step error ratio " + fmt("%.2f", ratio));
    expect(ref.diagnostics.norm_drift < 1e-8, "split-step norm drift " + fmt("%.1e", ref.diagnostics.norm_drift));
  }

  // Beam-splitter cost.
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = (1.0 - a) * u(rng);
    const double c = bs_cost(a, b);
    if (c < 0.0 || c > 2.0 || bs_cost(b, a) != c) {
      failed.push_back("bs_cost property");
      break;
    }
  }
  expect(bs_cost(0.5, 0.5) == 0.0, "bs_cost minimum");

  // Magnus secular rates vs the AC-Stark coefficients.
  for (double eps : {0.0, 0.1, 0.2}) {
    const double om = 0.5;
    const auto h = [&](double t) { return even_ladder_interaction_hamiltonian(3, om, PolarizationError(eps), 0.0, t); };
    const auto r = magnus_secular_rates(h, std::numbers::pi / 2, 20);
    const double g = om * om * (eps / 4 - eps * eps / 2);
    const double e = om * om * (-3.0 / 64 - eps / 4 + 5 * eps * eps / 12);
    expect(std::abs(r[1] - e) <= 0.02 * std::abs(e), "Magnus excited rate at eps " + fmt("%.1f", eps));
    expect(std::abs(r[0] - g) <= 0.02 * std::max(std::abs(g), std::abs(e) * (eps == 0.0)),
           "Magnus ground rate at eps " + fmt("%.1f", eps));
  }

  // SI conversion.
  const auto rb = UnitSystem::rubidium87();
  const double wr = rb.recoil_frequency_si();
  const double t = si_convert(rb, 7.87, Quantity::Time, Direction::ToSi);
  expect(std::abs(wr / 2.371e4 - 1) <= 1e-3, "recoil frequency " + fmt("%.1f", wr));
  expect(std::abs(t - 332e-6) <= 2e-6, "7.87 / omega_rec = " + fmt("%.3e", t));

  std::string d = failed.empty() ? "all properties hold" : "failed:";
  for (const auto& f : failed) d += " " + f + ";";
  return {failed.empty(), d};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Context cx;
  cx.campaigns = "tools/campaigns";
  cx.out = "acceptance_out";
  std::vector<int> only;
  app.add_option("--campaigns", cx.campaigns, "Campaign definitions directory");
  app.add_option("--out", cx.out, "Output directory");
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(cx.out);

  const std::vector<std::pair<std::string, std::function<Verdict(Context&)>>> criteria{
      {"TLS vs exact box scan", tls_vs_exact},
      {"RWA inadequacy", rwa_inadequacy},
      {"constant-detuning optima", constant_detuning},
      {"linear-sweep robustness", sweep_robustness},
      {"OCT polarization campaign", polarization_campaign},
      {"Doppler asymmetry sign", doppler_sign},
      {"Doppler linear sweep", doppler_sweep},
      {"combined OCT map", combined_map},
      {"finite-width campaign", finite_width},
      {"property suites", properties},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second(cx);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.pass;
    std::printf("criterion %2d %s: %s [%s] (%.0f s)\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
