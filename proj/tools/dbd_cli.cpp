// dbd-sim: command-line front end over the C API.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical-tolerance failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbd/dbd.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CliFailure {
  int code;
  std::string message;
};

void check(dbd_status s) {
  if (s == DBD_OK) return;
  const int code = dbd_status_is_numerical(s) ? kExitNumerical : kExitConfig;
  throw CliFailure{code, dbd_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  dbd_string_free(s);
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CliFailure{kExitConfig, "cannot open " + path};
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw CliFailure{kExitConfig, path + ": " + e.what()};
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw CliFailure{kExitConfig, "cannot write " + path.string()};
}

struct Common {
  std::string config;
  std::string out = ".";
  std::string tier;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double tol = 0.0;
  std::vector<std::string> axes;  // name=lo:hi:count or name=v1,v2,...
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Scenario JSON file");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--tier", c.tier, "Model tier: tls | rwa | five_level | n_level(n) | exact");
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--dt", c.dt, "Split-step time step (exact tier)");
  app->add_option("--tol", c.tol, "Adaptive integrator relative tolerance");
}

/// Scenario JSON from --config plus command-line overrides.
json scenario_json(const Common& c) {
  json j = c.config.empty() ? json::object() : read_json_file(c.config);
  if (!c.tier.empty()) j["tier"] = c.tier;
  if (c.seed != 0) j["seed"] = c.seed;
  if (c.dt > 0) j["dt"] = c.dt;
  if (c.tol > 0) j["tol"] = c.tol;
  j["out"] = c.out;
  return j;
}

json parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw CliFailure{kExitConfig, "axis '" + spec + "' must look like name=lo:hi:count"};
  json a;
  a["name"] = spec.substr(0, eq);
  const std::string rest = spec.substr(eq + 1);
  try {
    if (rest.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::stringstream ss(rest);
      for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
      if (parts.size() != 3) throw CliFailure{kExitConfig, "axis range must be lo:hi:count"};
      a["min"] = std::stod(parts[0]);
      a["max"] = std::stod(parts[1]);
      a["count"] = std::stol(parts[2]);
    } else {
      std::vector<double> values;
      std::stringstream ss(rest);
      for (std::string p; std::getline(ss, p, ',');) values.push_back(std::stod(p));
      a["values"] = values;
    }
  } catch (const std::logic_error&) {
    throw CliFailure{kExitConfig, "cannot parse axis '" + spec + "'"};
  }
  return a;
}

/// Axes from --axis flags, else from the "axes" array of the config.
std::string axes_json(const Common& c, const json& scenario) {
  json axes = json::array();
  for (const auto& s : c.axes) axes.push_back(parse_axis(s));
  if (axes.empty() && scenario.contains("axes")) axes = scenario.at("axes");
  return axes.dump();
}

struct Scenario {
  dbd_scenario* handle = nullptr;
  explicit Scenario(const json& j) { check(dbd_scenario_from_json(j.dump().c_str(), &handle)); }
  ~Scenario() { dbd_scenario_free(handle); }
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;
};

void progress_printer(size_t evals, double best, void*) {
  std::fprintf(stderr, "\r%zu evaluations, best cost %.6g", evals, best);
  std::fflush(stderr);
}

std::string id_of(const json& j) { return j.value("id", std::string("custom")); }

int run_simulate(const Common& c) {
  const json sj = scenario_json(c);
  Scenario s(sj);
  dbd_result* r = nullptr;
  check(dbd_simulate(s.handle, &r));
  char* js = nullptr;
  char* csv = nullptr;
  const dbd_status a = dbd_result_to_json(r, &js);
  const dbd_status b = dbd_result_trajectory_csv(r, &csv);
  dbd_result_free(r);
  const std::string summary = take(js);
  const std::string traj = take(csv);
  check(a);
  check(b);
  const fs::path out(c.out);
  write_file(out / (id_of(sj) + "_result.json"), summary + "\n");
  if (sj.value("trajectory_samples", 0) > 0) write_file(out / (id_of(sj) + "_trajectory.csv"), traj);
  std::cout << summary << '\n';
  return 0;
}

int run_scan(const Common& c) {
  const json sj = scenario_json(c);
  Scenario s(sj);
  char* csv = nullptr;
  check(dbd_scan_csv(s.handle, axes_json(c, sj).c_str(), &csv));
  const fs::path path = fs::path(c.out) / (id_of(sj) + "_scan.csv");
  write_file(path, take(csv));
  std::cout << path.string() << '\n';
  return 0;
}

int run_validate(const Common& c, const std::string& a, const std::string& b) {
  const json sj = scenario_json(c);
  Scenario s(sj);
  char* rep = nullptr;
  check(dbd_validate(a.c_str(), b.c_str(), s.handle, axes_json(c, sj).c_str(), &rep));
  const std::string text = take(rep);
  write_file(fs::path(c.out) / (id_of(sj) + "_validate.json"), text + "\n");
  std::cout << text << '\n';
  return 0;
}

int run_reproduce(const Common& c, const std::string& figure, const std::string& outcome,
                  const std::string& campaigns, bool quick) {
  json o;
  o["out"] = c.out;
  o["seed"] = c.seed;
  if (c.dt > 0) o["dt"] = c.dt;
  if (c.tol > 0) o["tol"] = c.tol;
  if (!outcome.empty()) o["outcome"] = outcome;
  if (!campaigns.empty()) o["campaigns"] = campaigns;
  o["quick"] = quick;
  char* sum = nullptr;
  check(dbd_reproduce(figure.c_str(), o.dump().c_str(), progress_printer, nullptr, &sum));
  std::cout << take(sum) << '\n';
  return 0;
}

int run_optimize(const Common& c, const std::string& campaign, std::size_t budget) {
  const json cj = read_json_file(campaign);
  char* out = nullptr;
  check(dbd_optimize(cj.dump().c_str(), c.seed, budget, progress_printer, nullptr, &out));
  std::fprintf(stderr, "\n");
  const std::string text = take(out);
  const fs::path path = fs::path(c.out) / (fs::path(campaign).stem().string() + "_outcome.json");
  write_file(path, text + "\n");
  std::cout << text << '\n';
  return 0;
}

int run_convert(double value, const std::string& quantity, const std::string& direction, double wavelength,
                double mass) {
  double out = 0.0;
  check(dbd_convert_units(value, quantity.c_str(), direction.c_str(), wavelength, mass, &out));
  double w = 0.0;
  check(dbd_recoil_frequency(wavelength, mass, &w));
  std::printf("%.12g\n", out);
  std::fprintf(stderr, "recoil frequency %.6g rad/s\n", w);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double Bragg diffraction simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dbd_version()));

  Common common;

  auto* sim = app.add_subcommand("simulate", "Single evolution of a scenario");
  add_common(sim, common);

  auto* scan = app.add_subcommand("scan", "Grid scan over scenario parameters");
  add_common(scan, common);
  scan->add_option("--axis", common.axes, "name=lo:hi:count or name=v1,v2 (tau, omega, delta, eps, p, t0, sigma_p)");

  std::string figure, outcome, campaigns;
  bool quick = false;
  auto* rep = app.add_subcommand("reproduce", "Regenerate the data behind a figure");
  add_common(rep, common);
  rep->add_option("figure", figure, "Figure id")->required();
  rep->add_option("--outcome", outcome, "Optimization outcome JSON to evaluate instead of optimizing");
  rep->add_option("--campaigns", campaigns, "Directory with campaign definitions");
  rep->add_flag("--quick", quick, "Coarse grids");

  std::string campaign;
  std::size_t budget = 0;
  auto* opt = app.add_subcommand("optimize", "Run an optimization campaign");
  add_common(opt, common);
  opt->add_option("campaign", campaign, "Campaign JSON")->required();
  opt->add_option("--budget", budget, "Override the evaluation budget");

  std::string tier_a = "five_level", tier_b = "exact";
  auto* val = app.add_subcommand("validate", "Compare two tiers on the same scenario");
  add_common(val, common);
  val->add_option("--tier-a", tier_a, "First tier");
  val->add_option("--tier-b", tier_b, "Second tier");
  val->add_option("--axis", common.axes, "Optional scan axes");

  double value = 0.0, wavelength = 780.1e-9, mass = 86.909 * 1.66053906660e-27;
  std::string quantity = "time", direction = "to_si";
  auto* conv = app.add_subcommand("convert-units", "Convert between natural and SI units");
  conv->add_option("value", value, "Value to convert")->required();
  conv->add_option("--quantity", quantity, "time | frequency")->check(CLI::IsMember({"time", "frequency"}));
  conv->add_option("--to", direction, "to_si | to_natural")->check(CLI::IsMember({"to_si", "to_natural"}));
  conv->add_option("--wavelength", wavelength, "Laser wavelength in m");
  conv->add_option("--mass", mass, "Atomic mass in kg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return run_simulate(common);
    if (*scan) return run_scan(common);
    if (*rep) return run_reproduce(common, figure, outcome, campaigns, quick);
    if (*opt) return run_optimize(common, campaign, budget);
    if (*val) return run_validate(common, tier_a, tier_b);
    if (*conv) return run_convert(value, quantity, direction, wavelength, mass);
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  }
  return 0;
}
