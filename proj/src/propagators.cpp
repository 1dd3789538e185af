#include "dbd/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fftw3.h>

#include "dbd/effective_tls.hpp"
#include "dbd/error.hpp"
#include "dopri.hpp"

namespace dbd {

using cd = std::complex<double>;
using std::numbers::sqrt2;

namespace {

constexpr cd kI{0.0, 1.0};

// Box pulses are evaluated closed on the right so that a window ending at tau
// sees the pulse on its last stage evaluation.
double omega_at(const PulseEnvelope& pulse, double t) {
  if (pulse.is_box()) {
    const auto& b = pulse.as_box();
    return (t >= 0.0 && t <= b.tau) ? b.omega : 0.0;
  }
  return pulse(t);
}

Eigen::VectorXcd two_level_bare(const Eigen::VectorXcd& y) {
  Eigen::VectorXcd bare(3);
  bare[1] = y[0];
  bare[0] = y[1] / sqrt2;
  bare[2] = y[1] / sqrt2;
  return bare;
}

std::vector<double> sample_grid(TimeWindow window, std::size_t uniform, const std::vector<double>& extra) {
  std::vector<double> times;
  if (uniform == 1) {
    times.push_back(window.end);
  } else if (uniform > 1) {
    for (std::size_t k = 0; k < uniform; ++k)
      times.push_back(window.start + window.length() * static_cast<double>(k) / static_cast<double>(uniform - 1));
    times.back() = window.end;
  }
  for (double t : extra) {
    if (t < window.start || t > window.end)
      throw Error(ErrorCode::InvalidArgument, "trajectory sample time outside the evolution window");
    times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

void check_window(TimeWindow window) {
  if (!std::isfinite(window.start) || !std::isfinite(window.end) || window.end < window.start)
    throw Error(ErrorCode::InvalidArgument, "evolution window must be finite with end >= start");
}

}  // namespace

// ---------------------------------------------------------------------------
// Models

void FewLevelModel::derivative(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) const {
  dy.noalias() = -kI * (hamiltonian(t) * y);
}

Eigen::VectorXcd FewLevelModel::to_lab(const Eigen::VectorXcd& y, double) const { return y; }

Eigen::VectorXcd FewLevelModel::initial_state(double) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dimension());
  y[0] = 1.0;
  return y;
}

MultilevelModel::MultilevelModel(MomentumBasis basis, PulseEnvelope pulse, DetuningProfile detuning,
                                 PolarizationError eps, Picture picture)
    : basis_(basis),
      pulse_(std::move(pulse)),
      detuning_(std::move(detuning)),
      eps_(eps),
      picture_(picture),
      energies_(basis.energies()) {
  if (basis_.n_max < 1) throw Error(ErrorCode::BasisTooSmall, "momentum basis needs n_max >= 1");
}

Eigen::MatrixXcd MultilevelModel::hamiltonian(double t) const {
  const double omega = omega_at(pulse_, t);
  const double c = coupling_factor(t, eps_, detuning_);
  return picture_ == Picture::Lab ? build_lab_hamiltonian(basis_, omega, c, t)
                                  : build_interaction_hamiltonian(basis_, omega, c, t);
}

void MultilevelModel::derivative(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) const {
  const int n_max = basis_.n_max;
  const double g = omega_at(pulse_, t) * coupling_factor(t, eps_, detuning_);

  // Shell coupling phases exp(-i 4 (2n+1) t); identity in the lab frame.
  const bool lab = picture_ == Picture::Lab;
  const cd z = lab ? cd{1.0} : std::polar(1.0, -kBraggResonance * t);
  const cd z2 = z * z;
  cd phase = z;  // n = 0 -> 1

  // Accumulate H y, then multiply by -i.
  dy.setZero();
  if (lab) {
    for (Eigen::Index i = 0; i < y.size(); ++i) dy[i] = energies_[i] * y[i];
  }

  {
    const cd h01 = sqrt2 * g * phase;
    dy[0] += h01 * y[1];
    dy[1] += std::conj(h01) * y[0];
  }
  for (int n = 1; n <= n_max; ++n) {
    const int s = MomentumBasis::symmetric_index(n);
    const int a = MomentumBasis::antisymmetric_index(n);
    const double d = doppler_shift(basis_.p, n);
    dy[s] += d * y[a];
    dy[a] += d * y[s];
    if (n < n_max) {
      phase *= z2;
      const cd h = g * phase;
      const cd hc = std::conj(h);
      dy[s] += h * y[s + 2];
      dy[s + 2] += hc * y[s];
      dy[a] += h * y[a + 2];
      dy[a + 2] += hc * y[a];
    }
  }
  dy *= -kI;
}

Eigen::VectorXcd MultilevelModel::bare_amplitudes(const Eigen::VectorXcd& y) const {
  return dbd::bare_amplitudes(basis_, y);
}

Eigen::VectorXcd MultilevelModel::to_lab(const Eigen::VectorXcd& y, double t) const {
  return picture_ == Picture::Lab ? y : interaction_to_lab(basis_, y, t);
}

Eigen::VectorXcd MultilevelModel::initial_state(double t) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dimension());
  y[0] = picture_ == Picture::Lab ? std::polar(1.0, -energies_[0] * t) : cd{1.0};
  return y;
}

double MultilevelModel::edge_population(const Eigen::VectorXcd& y) const { return top_shell_population(basis_, y); }

TlsModel::TlsModel(PulseEnvelope pulse, const DetuningProfile& detuning, PolarizationError eps)
    : pulse_(std::move(pulse)), delta_(0.0), eps_(eps) {
  if (!detuning.is_constant())
    throw Error(ErrorCode::IncompatibleTier,
                "the effective two-level model is defined for constant detuning only; use the multilevel tier");
  delta_ = detuning(0.0);
}

Eigen::MatrixXcd TlsModel::hamiltonian(double t) const {
  return build_tls_hamiltonian(omega_at(pulse_, t), delta_, eps_, t);
}

Eigen::VectorXcd TlsModel::bare_amplitudes(const Eigen::VectorXcd& y) const { return two_level_bare(y); }

Eigen::VectorXcd TlsModel::to_lab(const Eigen::VectorXcd& y, double t) const {
  Eigen::VectorXcd out = y;
  out[1] *= std::polar(1.0, -kBraggResonance * t);
  return out;
}

Eigen::VectorXcd ConstantTwoLevelModel::bare_amplitudes(const Eigen::VectorXcd& y) const {
  return two_level_bare(y);
}

// ---------------------------------------------------------------------------
// Few-level propagation

FewLevelResult propagate_few_level(const FewLevelModel& model, TimeWindow window, const PropagationOptions& options) {
  check_window(window);
  if (!(options.rtol > 0.0) || !(options.atol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "integration tolerances must be > 0");

  Eigen::VectorXcd y = options.initial ? *options.initial : model.initial_state(window.start);
  if (y.size() != model.dimension())
    throw Error(ErrorCode::InconsistentBasis, "initial state does not match the model dimension");

  FewLevelResult result;
  result.max_order = model.max_order();
  Diagnostics& diag = result.diagnostics;
  const double norm0 = y.squaredNorm();

  auto record = [&](double t, const Eigen::VectorXcd& state) {
    result.trajectory.push_back({t, model.bare_populations(state), state.squaredNorm()});
  };
  auto track = [&](const Eigen::VectorXcd& state) {
    diag.leakage = std::max(diag.leakage, model.edge_population(state));
    diag.norm_drift = std::max(diag.norm_drift, std::abs(state.squaredNorm() - norm0));
  };

  const auto times = sample_grid(window, options.trajectory_samples, options.sample_times);
  std::size_t first = 0;
  while (first < times.size() && times[first] <= window.start) {
    record(times[first], y);
    ++first;
  }
  const std::vector<double> stops(times.begin() + static_cast<std::ptrdiff_t>(first), times.end());
  track(y);

  detail::DopriOptions dopt{options.rtol, options.atol, options.max_steps};
  const auto stats = detail::dopri54(
      [&model](double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) { model.derivative(t, v, dv); },
      window.start, window.end, y, dopt, stops, record, [&](double, const Eigen::VectorXcd& v) { track(v); });

  diag.steps = stats.accepted;
  diag.rejected_steps = stats.rejected;
  if (diag.norm_drift > kNormTolerance) {
    diag.norm_flag = true;
    std::ostringstream msg;
    msg << "norm drift " << diag.norm_drift << " exceeds " << kNormTolerance;
    if (options.throw_on_norm_drift) throw Error(ErrorCode::NormDrift, msg.str());
    diag.warnings.push_back(msg.str());
  }
  if (diag.leakage > kLeakageThreshold) {
    diag.leakage_flag = true;
    std::ostringstream msg;
    msg << "population in the truncation edge reached " << diag.leakage << "; increase n_max";
    diag.warnings.push_back(msg.str());
  }

  result.final_state = {y, model.picture()};
  result.t_final = window.end;
  result.populations = model.bare_populations(y);
  return result;
}

FewLevelResult propagate_multilevel(double p, int n_max, const PulseEnvelope& pulse, const DetuningProfile& detuning,
                                    PolarizationError eps, TimeWindow window, const PropagationOptions& options,
                                    Picture picture) {
  const MultilevelModel model(MomentumBasis(p, n_max), pulse, detuning, eps, picture);
  return propagate_few_level(model, window, options);
}

// ---------------------------------------------------------------------------
// Momentum grids and wavepackets

long MomentumGrid::steps_per_order() const noexcept {
  if (!(dp > 0.0)) return 0;
  const double m = 2.0 / dp;
  const double r = std::round(m);
  if (r < 1.0 || std::abs(m - r) > 1e-9 * r) return 0;
  return static_cast<long>(r);
}

double MomentumWavepacket::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s * grid.dp;
}

MomentumWavepacket gaussian_wavepacket(const MomentumGrid& grid, double p0, double sigma_p) {
  if (!(sigma_p > 0.0)) throw Error(ErrorCode::InvalidArgument, "momentum width must be > 0");
  if (grid.n_points < 2 || !(grid.dp > 0.0)) throw Error(ErrorCode::InvalidArgument, "momentum grid is empty");
  MomentumWavepacket packet{grid, std::vector<cd>(grid.n_points), p0, sigma_p};
  const double pref = std::pow(2.0 * std::numbers::pi * sigma_p * sigma_p, -0.25);
  for (std::size_t k = 0; k < grid.n_points; ++k) {
    const double u = grid.p(k) - p0;
    packet.amplitudes[k] = pref * std::exp(-u * u / (4.0 * sigma_p * sigma_p));
  }
  const double n = packet.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::GridTooCoarse, "wavepacket has no weight on the momentum grid");
  const double s = 1.0 / std::sqrt(n);
  for (auto& a : packet.amplitudes) a *= s;
  return packet;
}

namespace {

// FFTW planning is not thread safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPair {
 public:
  explicit FftPair(std::size_t n) : n_(n) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    const int len = static_cast<int>(n);
    fwd_ = fftw_plan_dft_1d(len, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(len, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftPair() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  cd* data() { return reinterpret_cast<cd*>(buf_); }
  // to position space: sum_k psi_k exp(+2 pi i k j / n)
  void to_position() { fftw_execute(fwd_); }
  // back to momentum space (unnormalized)
  void to_momentum() { fftw_execute(inv_); }

 private:
  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

int zone_of_index(long m, long steps) {
  // p = m dp, zone n holds (-1 + 2n, 1 + 2n] i.e. m in (-steps/2 + n steps, steps/2 + n steps].
  // n = ceil((m - steps/2) / steps) with exact integer arithmetic on 2m.
  const long num = 2 * m - steps;
  const long den = 2 * steps;
  long q = num / den;
  if (num % den != 0 && num > 0) ++q;
  return static_cast<int>(q);
}

int zone_of_momentum(double p) { return static_cast<int>(std::ceil((p - 1.0) / 2.0)); }

Eigen::VectorXd report_bins(const std::map<int, double>& bins, int k) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * k + 1);
  for (const auto& [n, v] : bins)
    if (n >= -k && n <= k) out[n + k] = v;
  return out;
}

}  // namespace

std::map<int, double> bin_populations(const MomentumWavepacket& packet) {
  std::map<int, double> bins;
  const auto& grid = packet.grid;
  const long steps = grid.steps_per_order();
  const long half = static_cast<long>(grid.n_points / 2);
  for (std::size_t k = 0; k < packet.amplitudes.size(); ++k) {
    const double w = std::norm(packet.amplitudes[k]) * grid.dp;
    const int n = steps > 0 ? zone_of_index(static_cast<long>(k) - half, steps) : zone_of_momentum(grid.p(k));
    bins[n] += w;
  }
  return bins;
}

WavepacketResult split_step_evolve(const PulseEnvelope& pulse, const DetuningProfile& detuning,
                                   PolarizationError eps, const MomentumWavepacket& initial, TimeWindow window,
                                   const SplitStepOptions& options) {
  check_window(window);
  if (!(options.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "split-step dt must be > 0");
  const MomentumGrid& grid = initial.grid;
  const std::size_t n = grid.n_points;
  if (initial.amplitudes.size() != n)
    throw Error(ErrorCode::InconsistentBasis, "wavepacket amplitudes do not match the grid");
  if (n < 8 || n % 4 != 0) throw Error(ErrorCode::GridTooCoarse, "grid size must be a multiple of 4");
  const long steps = grid.steps_per_order();
  if (steps == 0)
    throw Error(ErrorCode::GridTooCoarse, "grid spacing is not commensurate with the lattice (2 / dp not integral)");
  if (options.enforce_exact_grid) {
    if (grid.p_max() < kExactMomentumExtent || -grid.p_min() < kExactMomentumExtent)
      throw Error(ErrorCode::GridTooCoarse, "momentum grid must span at least +/-10.9 hbar k_L");
    if (grid.dp > initial.sigma_p / 8.0 * (1.0 + 1e-12))
      throw Error(ErrorCode::GridTooCoarse, "momentum spacing must not exceed sigma_p / 8");
  }

  WavepacketResult result;
  Diagnostics& diag = result.diagnostics;
  const double norm0 = initial.norm();

  FftPair fft(n);
  cd* psi = fft.data();
  const long half = static_cast<long>(n / 2);
  // Work with (-1)^k psi_k: with centered grids the remaining sign factors of
  // the shifted transform cancel between the forward and inverse transforms.
  for (std::size_t k = 0; k < n; ++k) psi[k] = (k % 2 ? -1.0 : 1.0) * initial.amplitudes[k];

  // cos(2 x_j) with x_j = (j - n/2) 2 pi / (n dp) repeats every n / gcd(n, steps) points.
  const std::size_t period = n / std::gcd(n, static_cast<std::size_t>(steps));
  std::vector<double> lattice(period);
  for (std::size_t j = 0; j < period; ++j) {
    const long r = ((static_cast<long>(j) - half) * steps) % static_cast<long>(n);
    lattice[j] = std::cos(2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
  }
  std::vector<cd> pot_phase(period);
  std::vector<double> p2(n);
  for (std::size_t k = 0; k < n; ++k) p2[k] = grid.p(k) * grid.p(k);

  auto kinetic = [&](double h) {
    for (std::size_t k = 0; k < n; ++k) psi[k] *= std::polar(1.0, -p2[k] * h);
  };
  const double inv_n = 1.0 / static_cast<double>(n);
  auto potential = [&](double t_mid, double h) {
    const double omega = omega_at(pulse, t_mid);
    if (omega == 0.0) return;
    const double a = 2.0 * omega * coupling_factor(t_mid, eps, detuning) * h;
    for (std::size_t j = 0; j < period; ++j) pot_phase[j] = std::polar(inv_n, -a * lattice[j]);
    fft.to_position();
    for (std::size_t j0 = 0; j0 < n; j0 += period)
      for (std::size_t j = 0; j < period; ++j) psi[j0 + j] *= pot_phase[j];
    fft.to_momentum();
  };

  auto snapshot = [&]() {
    MomentumWavepacket out{grid, std::vector<cd>(n), initial.p0, initial.sigma_p};
    for (std::size_t k = 0; k < n; ++k) out.amplitudes[k] = (k % 2 ? -1.0 : 1.0) * psi[k];
    return out;
  };
  auto edge_population = [&]() {
    // Weight within one order of the grid boundary.
    double s = 0.0;
    const std::size_t edge = std::min<std::size_t>(static_cast<std::size_t>(steps), n / 4);
    for (std::size_t k = 0; k < edge; ++k) s += std::norm(psi[k]) + std::norm(psi[n - 1 - k]);
    return s * grid.dp;
  };
  auto current_norm = [&]() {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += std::norm(psi[k]);
    return s * grid.dp;
  };
  auto record = [&](double t) {
    const auto packet = snapshot();
    const double nrm = packet.norm();
    result.trajectory.push_back({t, report_bins(bin_populations(packet), options.report_orders), nrm});
    diag.norm_drift = std::max(diag.norm_drift, std::abs(nrm - norm0));
  };

  auto times = sample_grid(window, options.trajectory_samples, {});
  if (times.empty() || times.back() < window.end) times.push_back(window.end);

  double t = window.start;
  if (options.trajectory_samples > 0 && times.front() <= window.start) record(window.start);
  for (double target : times) {
    if (target <= t) continue;
    const double len = target - t;
    const auto m = static_cast<std::size_t>(std::ceil(len / options.dt - 1e-9));
    const double h = len / static_cast<double>(m);
    kinetic(0.5 * h);
    for (std::size_t s = 0; s < m; ++s) {
      potential(t + (static_cast<double>(s) + 0.5) * h, h);
      kinetic(s + 1 < m ? h : 0.5 * h);
    }
    diag.steps += m;
    t = target;
    diag.leakage = std::max(diag.leakage, edge_population());
    if (options.trajectory_samples > 0) record(t);
  }

  diag.norm_drift = std::max(diag.norm_drift, std::abs(current_norm() - norm0));
  if (diag.norm_drift > kNormTolerance) {
    diag.norm_flag = true;
    std::ostringstream msg;
    msg << "norm drift " << diag.norm_drift << " exceeds " << kNormTolerance;
    if (options.throw_on_norm_drift) throw Error(ErrorCode::NormDrift, msg.str());
    diag.warnings.push_back(msg.str());
  }
  if (diag.leakage > kLeakageThreshold) {
    diag.leakage_flag = true;
    diag.warnings.push_back("population reached the momentum grid boundary; enlarge the grid");
  }
  result.final_state = snapshot();
  return result;
}

MomentumWavepacket assemble_wavepacket(const std::vector<MomentumSampleResult>& samples, double dp) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no momentum samples to assemble");
  const MomentumGrid probe{2, dp};
  const long steps = probe.steps_per_order();
  if (steps == 0 || steps % 2 != 0)
    throw Error(ErrorCode::GridTooCoarse, "2 / dp must be an even integer to assemble a wavepacket");

  const Eigen::Index width = samples.front().bare_amplitudes.size();
  if (width < 1 || width % 2 == 0)
    throw Error(ErrorCode::InconsistentBasis, "bare amplitude vectors must have odd length 2K + 1");
  const long k_max = static_cast<long>(width / 2);

  const std::size_t n = static_cast<std::size_t>(steps * (2 * k_max + 1));
  MomentumWavepacket out{MomentumGrid{n, dp}, std::vector<cd>(n), 0.0, 0.0};
  const long half = static_cast<long>(n / 2);

  double wsum = 0.0, p1 = 0.0, p2 = 0.0;
  std::vector<bool> seen(static_cast<std::size_t>(steps), false);
  for (const auto& s : samples) {
    if (s.bare_amplitudes.size() != width)
      throw Error(ErrorCode::InconsistentBasis, "samples disagree on the number of momentum orders");
    const double mf = s.p / dp;
    const long m = std::lround(mf);
    if (std::abs(mf - static_cast<double>(m)) > 1e-6)
      throw Error(ErrorCode::InconsistentBasis, "sample momentum is not on the assembly grid");
    if (m < -steps / 2 || m >= steps / 2)
      throw Error(ErrorCode::InconsistentBasis, "sample momentum outside the first Brillouin zone");
    auto slot = static_cast<std::size_t>(m + steps / 2);
    if (seen[slot]) throw Error(ErrorCode::InconsistentBasis, "duplicate momentum sample");
    seen[slot] = true;

    const double w2 = std::norm(s.weight) * dp;
    wsum += w2;
    p1 += w2 * s.p;
    p2 += w2 * s.p * s.p;
    for (long order = -k_max; order <= k_max; ++order) {
      const long idx = m + order * steps + half;
      out.amplitudes[static_cast<std::size_t>(idx)] = s.weight * s.bare_amplitudes[order + k_max];
    }
  }
  if (std::abs(wsum - 1.0) > 1e-6)
    throw Error(ErrorCode::InvalidArgument, "sample weights are not normalized (sum |psi|^2 dp != 1)");
  out.p0 = p1 / wsum;
  out.sigma_p = std::sqrt(std::max(0.0, p2 / wsum - out.p0 * out.p0));
  return out;
}

MomentumWavepacket few_level_wavepacket(double p0, double sigma_p, int n_max, const PulseEnvelope& pulse,
                                        const DetuningProfile& detuning, PolarizationError eps, TimeWindow window,
                                        double dp, const PropagationOptions& options) {
  if (!(sigma_p > 0.0)) throw Error(ErrorCode::InvalidArgument, "momentum width must be > 0");
  const long steps = MomentumGrid{2, dp}.steps_per_order();
  if (steps == 0 || steps % 2 != 0)
    throw Error(ErrorCode::GridTooCoarse, "2 / dp must be an even integer to assemble a wavepacket");
  const long lo = std::max(-steps / 2, static_cast<long>(std::ceil((p0 - 6.0 * sigma_p) / dp)));
  const long hi = std::min(steps / 2 - 1, static_cast<long>(std::floor((p0 + 6.0 * sigma_p) / dp)));
  if (hi < lo) throw Error(ErrorCode::GridTooCoarse, "no momentum samples inside the first Brillouin zone");

  std::vector<MomentumSampleResult> samples;
  double wsum = 0.0;
  for (long m = lo; m <= hi; ++m) {
    const double p = static_cast<double>(m) * dp;
    const double u = p - p0;
    const double w = std::exp(-u * u / (4.0 * sigma_p * sigma_p));
    wsum += w * w * dp;
    const MultilevelModel model(MomentumBasis(p, n_max), pulse, detuning, eps);
    const auto r = propagate_few_level(model, window, options);
    samples.push_back({p, w, model.bare_amplitudes(model.to_lab(r.final_state.amplitudes, r.t_final))});
  }
  const double s = 1.0 / std::sqrt(wsum);
  for (auto& smp : samples) smp.weight *= s;
  auto packet = assemble_wavepacket(samples, dp);
  packet.p0 = p0;
  packet.sigma_p = sigma_p;
  return packet;
}

}  // namespace dbd
