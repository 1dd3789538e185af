#pragma once

// Dormand-Prince 5(4) with FSAL and standard step-size control, specialised
// to complex state vectors. Internal to the propagators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dbd/error.hpp"

namespace dbd::detail {

struct DopriOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 5'000'000;
};

struct DopriStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

// Integrates y' = f(t, y) from t0 to t1, landing exactly on every time in
// `stops` (sorted, inside (t0, t1]) and calling on_stop(t, y) there. After
// each accepted step on_step(t, y) is called.
template <class Rhs, class OnStop, class OnStep>
DopriStats dopri54(Rhs&& f, double t0, double t1, Eigen::VectorXcd& y, const DopriOptions& opt,
                   const std::vector<double>& stops, OnStop&& on_stop, OnStep&& on_step) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  DopriStats stats;
  if (t1 <= t0) return stats;

  const Eigen::Index n = y.size();
  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);

  f(t0, y, k1);

  auto error_norm = [&](double h) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = std::abs(h * err[i]) / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  // Initial step from the scale of the derivative (Hairer's heuristic, first
  // stage only).
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d0 += std::norm(y[i]) / (sc * sc);
      d1 += std::norm(k1[i]) / (sc * sc);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, t1 - t0);
  }

  double t = t0;
  std::size_t next_stop = 0;
  while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;

  const double eps = 64.0 * std::numeric_limits<double>::epsilon();
  while (t < t1) {
    if (stats.accepted + stats.rejected >= opt.max_steps)
      throw Error(ErrorCode::ToleranceNotMet, "step budget exhausted before reaching the end of the window");

    const double target = next_stop < stops.size() ? std::min(stops[next_stop], t1) : t1;
    bool lands = false;
    if (t + h >= target - eps * std::max(1.0, std::abs(target))) {
      h = target - t;
      lands = true;
    }
    if (h <= eps * std::max(1.0, std::abs(t)))
      throw Error(ErrorCode::ToleranceNotMet, "step size underflow: requested tolerance cannot be met");

    tmp = y + h * a21 * k1;
    f(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double t_new = lands ? target : t + h;
    f(t_new, ynew, k7);
    err = e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7;

    const double en = error_norm(h);
    if (!std::isfinite(en))
      throw Error(ErrorCode::ToleranceNotMet, "non-finite error estimate in adaptive integrator");

    if (en <= 1.0) {
      t = t_new;
      y = ynew;
      k1 = k7;
      ++stats.accepted;
      on_step(t, y);
      if (lands && next_stop < stops.size() && target == std::min(stops[next_stop], t1)) {
        on_stop(t, y);
        ++next_stop;
      }
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++stats.rejected;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
    }
  }
  return stats;
}

}  // namespace dbd::detail
