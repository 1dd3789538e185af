#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "dbd/control.hpp"
#include "dbd/error.hpp"

using namespace dbd;

namespace {

// Abramowitz & Stegun, Table 25.10, n = 8 (positive nodes).
constexpr double kGhNodes[] = {0.381186990207322, 1.157193712446780, 1.981656756695843, 2.930637420257244};
constexpr double kGhWeights[] = {0.661147012558241, 0.207802325814892, 0.0170779830074134, 0.000199604072211368};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("detuning-control") {

TEST_CASE("linear sweeps") {
  const auto pol = linear_sweep_polarization(0.47, 0.0);
  CHECK(pol(-0.47) == doctest::Approx(0.0));
  CHECK(pol(0.0) == doctest::Approx(0.4));
  const auto shifted = linear_sweep_polarization(0.47, 2.0);
  CHECK(shifted(3.0) - shifted(2.0) == doctest::Approx(pol(1.0) - pol(0.0)));

  const auto dop = linear_sweep_doppler(0.45);
  CHECK(dop(-0.9 * 0.45) == doctest::Approx(0.0));
  CHECK(dop(0.0) == doctest::Approx(0.18));
  CHECK_THROWS_AS((void)linear_sweep_doppler(0.0), Error);
}

TEST_CASE("sampling") {
  auto s = sample_errors({});
  REQUIRE(s.size() == 1);
  CHECK(s[0].eps == 0.0);
  CHECK(s[0].p == 0.0);
  CHECK(s[0].weight == 1.0);

  s = sample_errors({AxisSpec::uniform(0.0, 0.1, 2), AxisSpec::fixed(0.0), 0});
  REQUIRE(s.size() == 2);
  CHECK(s[0].eps == doctest::Approx(0.025));
  CHECK(s[1].eps == doctest::Approx(0.075));
  CHECK(s[0].weight == doctest::Approx(0.5));

  s = sample_errors({AxisSpec::fixed(0.0), AxisSpec::gaussian(0.0, 0.05, 8), 0});
  REQUIRE(s.size() == 8);
  const double scale = std::sqrt(2.0) * 0.05;
  for (int i = 0; i < 4; ++i) {
    CHECK(s[static_cast<std::size_t>(4 + i)].p == doctest::Approx(scale * kGhNodes[i]).epsilon(1e-12));
    CHECK(s[static_cast<std::size_t>(3 - i)].p == doctest::Approx(-scale * kGhNodes[i]).epsilon(1e-12));
    CHECK(s[static_cast<std::size_t>(4 + i)].weight ==
          doctest::Approx(kGhWeights[i] / std::sqrt(std::numbers::pi)).epsilon(1e-10));
  }

  s = sample_errors({AxisSpec::grid(0.0, 0.1, 5), AxisSpec::grid(-0.18, 0.18, 7), 0});
  REQUIRE(s.size() == 35);
  CHECK(s.front().eps == 0.0);
  CHECK(s.front().p == doctest::Approx(-0.18));
  CHECK(s.back().eps == doctest::Approx(0.1));
  CHECK(s.back().p == doctest::Approx(0.18));
}

TEST_CASE("sample weights sum to one and draws are reproducible") {
  const SamplingSpec specs[] = {
      {AxisSpec::uniform(0.0, 0.1, 8), AxisSpec::uniform(-0.3, 0.3, 13), 4},
      {AxisSpec::uniform(0.0, 0.1, 40), AxisSpec::uniform(-0.3, 0.3, 20), 99},
      {AxisSpec::uniform(0.0, 0.1, 5), AxisSpec::gaussian(0.1, 0.05, 12), 0},
  };
  for (const auto& spec : specs) {
    const auto a = sample_errors(spec);
    const auto b = sample_errors(spec);
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      w += a[i].weight;
      CHECK(a[i].eps == b[i].eps);
      CHECK(a[i].p == b[i].p);
      CHECK(a[i].eps >= 0.0);
      CHECK(a[i].eps <= 0.1);
    }
    CHECK(std::abs(w - 1.0) < 1e-12);
  }
  // Random draws depend on the seed and stay in range.
  auto x = sample_errors({AxisSpec::fixed(0.0), AxisSpec::uniform(-0.3, 0.3, 40), 1});
  auto y = sample_errors({AxisSpec::fixed(0.0), AxisSpec::uniform(-0.3, 0.3, 40), 2});
  bool differ = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(x[i].p) <= 0.3);
    differ = differ || x[i].p != y[i].p;
  }
  CHECK(differ);

  CHECK(code_of([] { (void)sample_errors({AxisSpec::uniform(0.0, 0.1, 0), AxisSpec::fixed(0.0), 0}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("beam-splitter cost examples") {
  CHECK(bs_cost(0.5, 0.5) == 0.0);
  CHECK(bs_cost(0.0, 0.0) == 1.0);
  CHECK(bs_cost(1.0, 0.0) == 2.0);
  CHECK(bs_cost(std::vector<PortPopulations>{{0.5, 0.5, 1.0}, {0.5, 0.5, 3.0}}) == 0.0);
  CHECK(bs_cost(std::vector<PortPopulations>{{0.0, 0.0, 1.0}, {0.5, 0.5, 3.0}}) == doctest::Approx(0.25));
  CHECK(worst_bs_cost(std::vector<PortPopulations>{{0.0, 0.0, 1.0}, {0.5, 0.5, 3.0}}) == 1.0);
  CHECK(oct_bs_efficiency(0.25) == 0.75);
  CHECK(code_of([] { (void)bs_cost(std::vector<PortPopulations>{{0.7, 0.6, 1.0}}); }) == ErrorCode::InvalidPopulation);
  CHECK(code_of([] { (void)bs_cost(std::vector<PortPopulations>{{-0.1, 0.6, 1.0}}); }) ==
        ErrorCode::InvalidPopulation);
}

TEST_CASE("beam-splitter cost range and symmetry") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = (1.0 - a) * u(rng);
    const double c = bs_cost(a, b);
    CHECK(c >= 0.0);
    CHECK(c <= 2.0);
    CHECK(bs_cost(b, a) == c);
    CHECK(oct_bs_efficiency(c) >= -1.0);
    CHECK(oct_bs_efficiency(c) <= 1.0);
    if (c == 0.0) {
      CHECK(a == 0.5);
      CHECK(b == 0.5);
    }
  }
  std::vector<PortPopulations> set;
  for (int i = 0; i < 20; ++i) {
    const double a = u(rng);
    set.push_back({a, (1 - a) * u(rng), u(rng)});
  }
  auto swapped = set;
  for (auto& s : swapped) std::swap(s.plus, s.minus);
  CHECK(bs_cost(set) == doctest::Approx(bs_cost(swapped)).epsilon(1e-15));
}

TEST_CASE("efficiency maps") {
  ControlSpace space;
  space.family = DetuningFamily::PolarizationSweep;
  ControlVariables v;
  const auto m = efficiency_map(space, v, {0.0, 0.05}, {-0.1, 0.0, 0.1});
  REQUIRE(m.size() == 6);
  for (const auto& x : m) {
    CHECK(x.efficiency >= -1.0);
    CHECK(x.efficiency <= 1.0);
    CHECK(x.efficiency == doctest::Approx(1.0 - bs_cost(x.p_plus, x.p_minus)));
  }
  CHECK(m[1].eps == 0.0);
  CHECK(m[1].p == 0.0);
  CHECK(m[1].efficiency > 0.99);
}

TEST_CASE("polynomial detuning family") {
  ControlSpace space;
  space.family = DetuningFamily::Polynomial;
  ControlVariables v{1.6, 0.6, 2.4, {0.9, -0.15, 0.18}};
  const auto d = space.detuning(v);
  const auto w = space.window(v);
  CHECK(w.start == 0.0);
  CHECK(w.end == doctest::Approx(4.8));
  // Knots land on s = (t - t0) / tau exactly at the centre.
  CHECK(d(2.4) == doctest::Approx(0.9).epsilon(1e-12));
  const double s = 1.0;
  CHECK(d(2.4 + s * 0.6) == doctest::Approx(0.9 - 0.15 + 0.18).epsilon(2e-3));
  v.knots = {0.0, 0.0, 0.0, 0.0, 0.0, 10.0};
  CHECK(space.detuning(v)(0.0) == -4.0);
}

TEST_CASE("degenerate optimization over the polarization sweep") {
  OptimizationProblem p;
  p.space.family = DetuningFamily::PolarizationSweep;
  p.initial = {1.9, 0.5, 0.0, {}};
  p.optimize_t0 = false;
  p.budget = 300;
  p.seed = 3;
  const auto out = optimize(p);
  CHECK(out.efficiency >= 0.995);
  CHECK(p.omega_bounds.contains(out.best.omega_r));
  CHECK(p.tau_bounds.contains(out.best.tau));
  CHECK(out.evaluations <= 300);
  CHECK(out.best_cost == doctest::Approx(evaluate_cost(p.space, out.best, sample_errors(p.sampling))).epsilon(1e-12));
  CHECK(out.efficiency == 1.0 - out.best_cost);

  const auto again = optimize(p);
  CHECK(again.best.omega_r == out.best.omega_r);
  CHECK(again.best.tau == out.best.tau);
  CHECK(again.best_cost == out.best_cost);
}

TEST_CASE("small budgets are flagged") {
  OptimizationProblem p;
  p.space.family = DetuningFamily::Knots;
  p.knot_count = 6;
  p.initial = {2.0, 0.47, 2.0, {}};
  p.sampling = {AxisSpec::uniform(0.0, 0.1, 2), AxisSpec::fixed(0.0), 0};
  p.budget = 100;
  const auto out = optimize(p);
  CHECK(out.budget_exhausted);
  CHECK(out.evaluations == 100);
  CHECK(out.best.knots.size() == 6);
  for (double k : out.best.knots) CHECK(std::abs(k) <= 4.0);
  CHECK(out.best.t0 >= 4.0 * out.best.tau * (1 - 1e-12));
  check_scalar_bounds(p, out.best);

  p.budget = 50;
  CHECK(code_of([&] { (void)optimize(p); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("worst-case aggregate") {
  OptimizationProblem p;
  p.space.family = DetuningFamily::Polynomial;
  p.space.polynomial_degree = 1;
  p.initial = {2.0, 0.47, 2.0, {0.3}};
  p.sampling = {AxisSpec::grid(0.0, 0.1, 2), AxisSpec::fixed(0.0), 0};
  p.aggregate = CostAggregate::Worst;
  p.budget = 150;
  const auto out = optimize(p);
  const auto ports = evaluate_ports(p.space, out.best, sample_errors(p.sampling));
  CHECK(out.best_cost == doctest::Approx(worst_bs_cost(ports)).epsilon(1e-12));
  CHECK(out.mean_cost == doctest::Approx(bs_cost(ports)).epsilon(1e-12));
  CHECK(out.mean_cost <= out.best_cost);
}

TEST_CASE("campaign JSON") {
  const auto j = nlohmann::json::parse(R"({
    "family": "knots", "knot_count": 8,
    "initial": {"omega_r": 2.0, "tau": 0.47, "t0": 2.0},
    "initial_detuning": {"kind": "constant", "value": 0.3},
    "sampling": {"eps": {"kind": "uniform", "min": 0, "max": 0.1, "count": 4}, "seed": 5},
    "bounds": {"omega_r": [1, 3]},
    "budget": 500, "seed": 7, "aggregate": "mean"
  })");
  const auto p = problem_from_json(j);
  CHECK(p.knot_count == 8);
  REQUIRE(p.initial.knots.size() == 8);
  for (double k : p.initial.knots) CHECK(k == doctest::Approx(0.3));
  CHECK(p.omega_bounds.lo == 1.0);
  CHECK(p.budget == 500);
  CHECK(p.sampling.eps.count == 4);
  CHECK(p.sampling.seed == 5);

  CHECK(code_of([] { (void)problem_from_json(nlohmann::json{{"family", "spline"}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { (void)problem_from_json(nlohmann::json::object()); }) == ErrorCode::ConfigError);
  auto bad = j;
  bad["aggregate"] = "median";
  CHECK(code_of([&] { (void)problem_from_json(bad); }) == ErrorCode::ConfigError);
}

}  // TEST_SUITE
