#include "dbd/dbd.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "dbd/control.hpp"
#include "dbd/error.hpp"
#include "dbd/presets.hpp"
#include "dbd/scenarios.hpp"
#include "dbd/units.hpp"

struct dbd_scenario {
  dbd::ScenarioConfig config;
};

struct dbd_result {
  dbd::SimulationResult result;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

dbd_status code_to_status(dbd::ErrorCode c) {
  switch (c) {
    case dbd::ErrorCode::InvalidArgument: return DBD_ERR_INVALID_ARGUMENT;
    case dbd::ErrorCode::MissingSiContext: return DBD_ERR_MISSING_SI_CONTEXT;
    case dbd::ErrorCode::BasisTooSmall: return DBD_ERR_BASIS_TOO_SMALL;
    case dbd::ErrorCode::QuadratureResolutionTooCoarse: return DBD_ERR_QUADRATURE_TOO_COARSE;
    case dbd::ErrorCode::ToleranceNotMet: return DBD_ERR_TOLERANCE_NOT_MET;
    case dbd::ErrorCode::NormDrift: return DBD_ERR_NORM_DRIFT;
    case dbd::ErrorCode::GridTooCoarse: return DBD_ERR_GRID_TOO_COARSE;
    case dbd::ErrorCode::InconsistentBasis: return DBD_ERR_INCONSISTENT_BASIS;
    case dbd::ErrorCode::InvalidPopulation: return DBD_ERR_INVALID_POPULATION;
    case dbd::ErrorCode::BudgetExhausted: return DBD_ERR_BUDGET_EXHAUSTED;
    case dbd::ErrorCode::IncompatibleTier: return DBD_ERR_INCOMPATIBLE_TIER;
    case dbd::ErrorCode::UnknownFigure: return DBD_ERR_UNKNOWN_FIGURE;
    case dbd::ErrorCode::ConfigError: return DBD_ERR_CONFIG;
    case dbd::ErrorCode::IoError: return DBD_ERR_IO;
  }
  return DBD_ERR_INTERNAL;
}

dbd_status fail(dbd_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

/// Runs `body`, translating exceptions into status codes.
template <class F>
dbd_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return DBD_OK;
  } catch (const dbd::Error& e) {
    return fail(code_to_status(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(DBD_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DBD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DBD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DBD_ERR_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw dbd::Error(dbd::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

json parse(const char* text, const char* what) {
  require(text, what);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw dbd::Error(dbd::ErrorCode::ConfigError, std::string(what) + ": " + e.what());
  }
}

std::vector<dbd::ScanAxis> parse_axes(const char* text) {
  std::vector<dbd::ScanAxis> axes;
  if (!text || !*text) return axes;
  const json j = parse(text, "axes");
  if (!j.is_array()) throw dbd::Error(dbd::ErrorCode::ConfigError, "axes must be a JSON array");
  for (const auto& a : j) {
    dbd::ScanAxis axis;
    axis.name = a.at("name").get<std::string>();
    if (a.contains("values")) {
      axis.values = a.at("values").get<std::vector<double>>();
    } else if (a.contains("count")) {
      const auto n = a.at("count").get<long>();
      if (n < 1) throw dbd::Error(dbd::ErrorCode::ConfigError, "axis count must be >= 1");
      axis.values = dbd::linspace(a.at("min").get<double>(), a.at("max").get<double>(), static_cast<std::size_t>(n));
    } else if (a.contains("step")) {
      axis.values = dbd::arange(a.at("min").get<double>(), a.at("max").get<double>(), a.at("step").get<double>());
    } else {
      throw dbd::Error(dbd::ErrorCode::ConfigError, "axis '" + axis.name + "' needs values, count or step");
    }
    axes.push_back(std::move(axis));
  }
  return axes;
}

json result_json(const dbd::SimulationResult& r) {
  json j;
  j["max_order"] = r.max_order;
  json pops = json::object();
  for (int n = -r.max_order; n <= r.max_order; ++n) pops[std::to_string(n)] = r.port(n);
  j["populations"] = pops;
  j["dbd_efficiency"] = r.dbd_efficiency();
  j["oct_bs_efficiency"] = r.oct_bs_efficiency();
  const auto& d = r.diagnostics;
  j["diagnostics"] = {{"norm_drift", d.norm_drift}, {"steps", d.steps},      {"rejected_steps", d.rejected_steps},
                      {"leakage", d.leakage},       {"norm_flag", d.norm_flag}, {"leakage_flag", d.leakage_flag},
                      {"warnings", d.warnings}};
  return j;
}

dbd::ProgressCallback wrap_progress(dbd_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](std::size_t evals, double best) { fn(evals, best, user); };
}

}  // namespace

extern "C" {

const char* dbd_version(void) { return "1.0.0"; }

const char* dbd_status_name(dbd_status status) {
  switch (status) {
    case DBD_OK: return "OK";
    case DBD_ERR_INTERNAL: return "Internal";
    default:
      if (status >= DBD_ERR_INVALID_ARGUMENT && status <= DBD_ERR_IO)
        return dbd::to_string(static_cast<dbd::ErrorCode>(status - 1));
      return "Unknown";
  }
}

int dbd_status_is_numerical(dbd_status status) {
  if (status >= DBD_ERR_INVALID_ARGUMENT && status <= DBD_ERR_IO)
    return dbd::is_numerical(static_cast<dbd::ErrorCode>(status - 1)) ? 1 : 0;
  return 0;
}

const char* dbd_last_error(void) { return g_last_error.c_str(); }

void dbd_string_free(char* s) { std::free(s); }

dbd_status dbd_scenario_new(dbd_scenario** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dbd_scenario{};
  });
}

dbd_status dbd_scenario_from_json(const char* text, dbd_scenario** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto cfg = dbd::scenario_from_json(parse(text, "scenario"));
    *out = new dbd_scenario{std::move(cfg)};
  });
}

dbd_status dbd_scenario_to_json(const dbd_scenario* s, char** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = dup_string(dbd::to_json(s->config).dump(2));
  });
}

dbd_status dbd_scenario_set_tier(dbd_scenario* s, const char* tier) {
  return guarded([&] {
    require(s, "scenario");
    require(tier, "tier");
    s->config.tier = dbd::Tier::parse(tier);
  });
}

dbd_status dbd_scenario_set_value(dbd_scenario* s, const char* key, double value) {
  return guarded([&] {
    require(s, "scenario");
    require(key, "key");
    const std::string k = key;
    auto& c = s->config;
    if (k == "eps")
      c.eps = dbd::PolarizationError(value).value;
    else if (k == "p")
      c.p = value;
    else if (k == "sigma_p")
      c.sigma_p = value;
    else if (k == "dt")
      c.dt = value;
    else if (k == "tol")
      c.tol = value;
    else
      throw dbd::Error(dbd::ErrorCode::InvalidArgument, "unknown scenario key '" + k + "'");
  });
}

dbd_status dbd_scenario_set_gaussian(dbd_scenario* s, double omega_r, double tau, double t0) {
  return guarded([&] {
    require(s, "scenario");
    s->config.pulse = dbd::PulseEnvelope::gaussian(omega_r, tau, t0);
    s->config.window.reset();
  });
}

dbd_status dbd_scenario_set_box(dbd_scenario* s, double omega, double tau) {
  return guarded([&] {
    require(s, "scenario");
    s->config.pulse = dbd::PulseEnvelope::box(omega, tau);
    s->config.window.reset();
  });
}

dbd_status dbd_scenario_set_constant_detuning(dbd_scenario* s, double delta) {
  return guarded([&] {
    require(s, "scenario");
    s->config.detuning = dbd::DetuningProfile::constant(delta, s->config.detuning.bound());
  });
}

void dbd_scenario_free(dbd_scenario* s) { delete s; }

dbd_status dbd_simulate(const dbd_scenario* s, dbd_result** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = nullptr;
    auto r = dbd::simulate(s->config);
    *out = new dbd_result{std::move(r)};
  });
}

int dbd_result_max_order(const dbd_result* r) { return r ? r->result.max_order : -1; }

dbd_status dbd_result_population(const dbd_result* r, int order, double* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = r->result.port(order);
  });
}

dbd_status dbd_result_dbd_efficiency(const dbd_result* r, double* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = r->result.dbd_efficiency();
  });
}

dbd_status dbd_result_oct_bs_efficiency(const dbd_result* r, double* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = r->result.oct_bs_efficiency();
  });
}

dbd_status dbd_result_norm_drift(const dbd_result* r, double* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = r->result.diagnostics.norm_drift;
  });
}

dbd_status dbd_result_to_json(const dbd_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup_string(result_json(r->result).dump(2));
  });
}

dbd_status dbd_result_trajectory_csv(const dbd_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    const auto& res = r->result;
    std::ostringstream os;
    os << "t";
    const int k = res.trajectory.empty() ? res.max_order : static_cast<int>(res.trajectory.front().populations.size() / 2);
    for (int n = -k; n <= k; ++n) os << ",P" << n;
    os << ",norm\n";
    for (const auto& s : res.trajectory) {
      os << dbd::format_number(s.t);
      for (Eigen::Index i = 0; i < s.populations.size(); ++i) os << ',' << dbd::format_number(s.populations[i]);
      os << ',' << dbd::format_number(s.norm) << '\n';
    }
    *out = dup_string(os.str());
  });
}

void dbd_result_free(dbd_result* r) { delete r; }

dbd_status dbd_scan_csv(const dbd_scenario* s, const char* axes_json, char** csv_out) {
  return guarded([&] {
    require(s, "scenario");
    require(csv_out, "out");
    const auto axes = parse_axes(axes_json);
    if (axes.empty()) throw dbd::Error(dbd::ErrorCode::ConfigError, "scan needs at least one axis");
    const auto table = dbd::run_scan(s->config, axes);
    std::ostringstream os;
    table.write_csv(os);
    *csv_out = dup_string(os.str());
  });
}

dbd_status dbd_validate(const char* tier_a, const char* tier_b, const dbd_scenario* s, const char* axes_json,
                        char** report_json) {
  return guarded([&] {
    require(tier_a, "tier_a");
    require(tier_b, "tier_b");
    require(s, "scenario");
    require(report_json, "out");
    const auto rep = dbd::validate(dbd::Tier::parse(tier_a), dbd::Tier::parse(tier_b), s->config, parse_axes(axes_json));
    *report_json = dup_string(rep.to_json().dump(2));
  });
}

dbd_status dbd_figure_ids(char** json_array) {
  return guarded([&] {
    require(json_array, "out");
    *json_array = dup_string(json(dbd::figure_ids()).dump());
  });
}

dbd_status dbd_reproduce(const char* figure, const char* options_json, dbd_progress_fn progress, void* user,
                         char** summary_json) {
  return guarded([&] {
    require(figure, "figure");
    require(summary_json, "out");
    dbd::ReproduceOptions o;
    if (options_json && *options_json) {
      const json j = parse(options_json, "options");
      o.out_dir = j.value("out", o.out_dir);
      o.seed = j.value("seed", o.seed);
      o.dt = j.value("dt", o.dt);
      o.tol = j.value("tol", o.tol);
      o.outcome_path = j.value("outcome", o.outcome_path);
      o.campaign_dir = j.value("campaigns", o.campaign_dir);
      o.quick = j.value("quick", o.quick);
    }
    o.progress = wrap_progress(progress, user);
    *summary_json = dup_string(dbd::reproduce(figure, o).dump(2));
  });
}

dbd_status dbd_presets_json(char** out) {
  return guarded([&] {
    require(out, "out");
    *out = dup_string(dbd::presets::registry_json().dump(2));
  });
}

dbd_status dbd_optimize(const char* campaign_json, uint64_t seed, size_t budget, dbd_progress_fn progress, void* user,
                        char** outcome_json) {
  return guarded([&] {
    require(outcome_json, "out");
    auto problem = dbd::problem_from_json(parse(campaign_json, "campaign"));
    if (seed != 0) problem.seed = seed;
    if (budget != 0) problem.budget = budget;
    const auto outcome = dbd::optimize(problem, wrap_progress(progress, user));
    *outcome_json = dup_string(dbd::to_json(outcome, problem.space).dump(2));
  });
}

dbd_status dbd_recoil_frequency(double wavelength_m, double mass_kg, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = dbd::UnitSystem{dbd::SiContext{wavelength_m, mass_kg}}.recoil_frequency_si();
  });
}

dbd_status dbd_convert_units(double value, const char* quantity, const char* direction, double wavelength_m,
                             double mass_kg, double* out) {
  return guarded([&] {
    require(quantity, "quantity");
    require(direction, "direction");
    require(out, "out");
    const std::string q = quantity, d = direction;
    dbd::Quantity qq;
    if (q == "time")
      qq = dbd::Quantity::Time;
    else if (q == "frequency")
      qq = dbd::Quantity::Frequency;
    else
      throw dbd::Error(dbd::ErrorCode::InvalidArgument, "quantity must be time or frequency");
    dbd::Direction dd;
    if (d == "to_si")
      dd = dbd::Direction::ToSi;
    else if (d == "to_natural")
      dd = dbd::Direction::ToNatural;
    else
      throw dbd::Error(dbd::ErrorCode::InvalidArgument, "direction must be to_si or to_natural");
    *out = dbd::si_convert(dbd::UnitSystem{dbd::SiContext{wavelength_m, mass_kg}}, value, qq, dd);
  });
}

}  // extern "C"
