#include "coagkin/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>

#include "coagkin/errors.hpp"
#include "coagkin/system.hpp"

namespace coagkin {

void SolverConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ContractError("rel_tol and abs_tol must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ContractError("t_end must be finite and > 0");
  if (!(max_step > 0.0)) throw ContractError("max_step must be > 0");
  if (!(positivity_floor >= 0.0)) throw ContractError("positivity_floor must be >= 0");
  if (!(safety > 0.0 && safety <= 1.0)) throw ContractError("safety must lie in (0, 1]");
  if (!(min_factor > 0.0 && min_factor < 1.0 && max_factor > 1.0)) {
    throw ContractError("controller clamp must satisfy 0 < min_factor < 1 < max_factor");
  }
  if (const auto* fixed = std::get_if<FixedStepMode>(&mode); fixed && !(fixed->h > 0.0)) {
    throw ContractError("fixed step h must be > 0");
  }
  if (sample_times.size() < 2) throw ContractError("sample_times needs at least 0 and t_end");
  if (sample_times.front() != 0.0 || sample_times.back() != t_end) {
    throw ContractError("sample_times must start at 0 and end at t_end");
  }
  for (std::size_t n = 1; n < sample_times.size(); ++n) {
    if (!(sample_times[n] > sample_times[n - 1])) {
      throw ContractError("sample_times must be strictly ascending");
    }
  }
}

std::vector<double> SolverConfig::uniform_samples(double t_end, std::size_t intervals) {
  if (intervals == 0) intervals = 1;
  std::vector<double> out(intervals + 1);
  for (std::size_t n = 0; n <= intervals; ++n) {
    out[n] = t_end * static_cast<double>(n) / static_cast<double>(intervals);
  }
  out.back() = t_end;
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

/// Truncated system augmented with the cumulative boundary outflux as component k.
class AugmentedSystem {
 public:
  AugmentedSystem(const CoagulationKernel& kernel, std::size_t k, StepStats& stats)
      : kernel_(kernel), k_(k), stats_(stats) {}

  std::size_t dimension() const noexcept { return k_ + 1; }

  void operator()(std::span<const double> y, std::span<double> dy, double t) const {
    const auto xi = y.first(k_);
    rhs_into(xi, kernel_, dy.first(k_), t);
    dy[k_] = boundary_outflux(xi, kernel_);
    if (!std::isfinite(dy[k_])) throw NumericError("non-finite boundary outflux", t);
    ++stats_.rhs_evaluations;
  }

 private:
  const CoagulationKernel& kernel_;
  std::size_t k_;
  StepStats& stats_;
};

void require_finite(std::span<const double> v, double t, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite ") + what, t);
  }
}

class Dopri5 {
 public:
  Dopri5(const AugmentedSystem& f, const SolverConfig& config)
      : f_(f), config_(config), n_(f.dimension()) {
    for (auto* v : {&k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &stage_, &ynew_}) v->resize(n_);
    for (auto& r : rcont_) r.resize(n_);
  }

  /// Computes ynew and the weighted max-norm error estimate for a step h from (t, y, f(y)=k1).
  double attempt(double t, std::span<const double> y, std::span<const double> k1, double h) {
    auto stage = [&](auto&& combine, std::vector<double>& kout, double c) {
      for (std::size_t i = 0; i < n_; ++i) stage_[i] = y[i] + h * combine(i);
      f_(stage_, kout, t + c * h);
    };
    stage([&](std::size_t i) { return a21 * k1[i]; }, k2_, c2);
    stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2_[i]; }, k3_, c3);
    stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2_[i] + a43 * k3_[i]; }, k4_, c4);
    stage([&](std::size_t i) {
      return a51 * k1[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i];
    }, k5_, c5);
    stage([&](std::size_t i) {
      return a61 * k1[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
    }, k6_, 1.0);
    for (std::size_t i = 0; i < n_; ++i) {
      ynew_[i] = y[i] + h * (a71 * k1[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                             a76 * k6_[i]);
    }
    require_finite(ynew_, t + h, "state after Runge-Kutta step");
    f_(ynew_, k7_, t + h);

    double norm = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double err = h * (e1 * k1[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                              e6 * k6_[i] + e7 * k7_[i]);
      const double scale =
          config_.abs_tol + config_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
      norm = std::max(norm, std::abs(err) / scale);
    }
    if (!std::isfinite(norm)) throw NumericError("non-finite error estimate", t + h);
    return norm;
  }

  /// Prepares the continuous extension of the last attempted step; call before clamping.
  void prepare_dense(std::span<const double> y, std::span<const double> k1, double h) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double ydiff = ynew_[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      rcont_[0][i] = y[i];
      rcont_[1][i] = ydiff;
      rcont_[2][i] = bspl;
      rcont_[3][i] = ydiff - h * k7_[i] - bspl;
      rcont_[4][i] = h * (d1 * k1[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                          d7 * k7_[i]);
    }
  }

  void dense(double theta, std::span<double> out) const {
    const double theta1 = 1.0 - theta;
    for (std::size_t i = 0; i < n_; ++i) {
      out[i] = rcont_[0][i] +
               theta * (rcont_[1][i] +
                        theta1 * (rcont_[2][i] + theta * (rcont_[3][i] + theta1 * rcont_[4][i])));
    }
  }

  std::vector<double>& result() noexcept { return ynew_; }
  std::vector<double>& last_derivative() noexcept { return k7_; }

 private:
  const AugmentedSystem& f_;
  const SolverConfig& config_;
  std::size_t n_;
  std::vector<double> k2_, k3_, k4_, k5_, k6_, k7_, stage_, ynew_;
  std::array<std::vector<double>, 5> rcont_;
};

/// Sets entries of xi in [-limit, 0) to zero; returns the clamped mass sum i*|x|,
/// or a negative value if some entry lies below -limit (nothing is modified then).
double clamp_negatives(std::span<double> xi, double limit) {
  double mass = 0.0;
  for (double x : xi) {
    if (x < -limit) return -1.0;
  }
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] < 0.0) {
      mass += static_cast<double>(i + 1) * -xi[i];
      xi[i] = 0.0;
    }
  }
  return mass;
}

/// Sample emission clamps every negative (interpolation overshoot), counting it.
double clamp_all_negatives(std::span<double> xi) {
  double mass = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] < 0.0) {
      mass += static_cast<double>(i + 1) * -xi[i];
      xi[i] = 0.0;
    }
  }
  return mass;
}

void record_step(StepStats& stats, double h) {
  if (stats.accepted == 0) {
    stats.min_step = stats.max_step = h;
  } else {
    stats.min_step = std::min(stats.min_step, h);
    stats.max_step = std::max(stats.max_step, h);
  }
  ++stats.accepted;
}

double weighted_norm(std::span<const double> v, std::span<const double> y,
                     const SolverConfig& c) {
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    norm = std::max(norm, std::abs(v[i]) / (c.abs_tol + c.rel_tol * std::abs(y[i])));
  }
  return norm;
}

double initial_step(const AugmentedSystem& f, std::span<const double> y,
                    std::span<const double> f0, const SolverConfig& c) {
  if (c.initial_step) return std::min({*c.initial_step, c.max_step, c.t_end});
  const double dy0 = weighted_norm(y, y, c);
  const double df0 = weighted_norm(f0, y, c);
  double h0 = (dy0 < 1e-5 || df0 < 1e-5) ? 1e-6 : 0.01 * dy0 / df0;
  h0 = std::min({h0, c.max_step, c.t_end});
  std::vector<double> y1(y.size()), f1(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y1[i] = y[i] + h0 * f0[i];
  f(y1, f1, h0);
  for (std::size_t i = 0; i < y.size(); ++i) f1[i] -= f0[i];
  const double d2 = weighted_norm(f1, y, c) / h0;
  const double dmax = std::max(df0, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, c.max_step, c.t_end});
}

class TrajectoryBuilder {
 public:
  TrajectoryBuilder(std::size_t k, const SolverConfig& config) : k_(k), config_(config) {
    traj_.samples.reserve(config.sample_times.size());
    traj_.boundary_loss.reserve(config.sample_times.size());
  }

  std::size_t next_sample() const noexcept { return traj_.samples.size(); }
  bool done() const noexcept { return next_sample() == config_.sample_times.size(); }
  double next_time() const { return config_.sample_times[next_sample()]; }

  void emit(std::vector<double> y) {
    const double t = next_time();
    traj_.step_stats.clamped_mass += clamp_all_negatives(std::span<double>(y).first(k_));
    traj_.boundary_loss.push_back(y[k_]);
    y.resize(k_);
    traj_.samples.emplace_back(std::move(y), t);
  }

  StepStats& stats() noexcept { return traj_.step_stats; }
  Trajectory& trajectory() noexcept { return traj_; }

 private:
  std::size_t k_;
  const SolverConfig& config_;
  Trajectory traj_;
};

void check_cancel(const std::atomic<bool>* cancel, TrajectoryBuilder& out,
                  const CoagulationKernel& kernel, const SolverConfig& config) {
  if (cancel && cancel->load(std::memory_order_relaxed)) {
    annotate(out.trajectory(), kernel, config.diagnostics);
    throw IntegrationInterrupted(std::move(out.trajectory()));
  }
}

void integrate_adaptive(const AugmentedSystem& f, std::vector<double> y, const SolverConfig& c,
                        TrajectoryBuilder& out, const CoagulationKernel& kernel,
                        const std::atomic<bool>* cancel) {
  const std::size_t n = y.size();
  const std::size_t k = n - 1;
  Dopri5 rk(f, c);
  std::vector<double> k1(n), sample(n);
  double t = 0.0;
  f(y, k1, t);

  double h = initial_step(f, y, k1, c);
  const double expo1 = 0.2 - c.controller_beta * 0.75;
  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;

  while (!out.done()) {
    check_cancel(cancel, out, kernel, c);
    if (++steps > c.max_steps) {
      throw IntegrationStalled("step budget exhausted at t=" + std::to_string(t),
                               SizeDistribution(std::vector<double>(y.begin(), y.begin() + k), t));
    }
    h = std::min({h, c.max_step, c.t_end - t});
    if (h < c.min_step()) {
      throw IntegrationStalled("step size underflow at t=" + std::to_string(t),
                               SizeDistribution(std::vector<double>(y.begin(), y.begin() + k), t));
    }

    const double err = rk.attempt(t, y, k1, h);
    const double fac11 = std::pow(err, expo1);
    if (err > 1.0) {
      ++out.stats().rejected_error;
      h /= std::min(1.0 / c.min_factor, fac11 / c.safety);
      last_rejected = true;
      continue;
    }

    auto& ynew = rk.result();
    rk.prepare_dense(y, k1, h);
    const double clamped = clamp_negatives(std::span<double>(ynew).first(k), c.positivity_guard());
    if (clamped < 0.0) {
      ++out.stats().rejected_positivity;
      h *= 0.5;
      last_rejected = true;
      continue;
    }
    out.stats().clamped_mass += clamped;
    record_step(out.stats(), h);

    const double t_new = (c.t_end - (t + h) <= 1e-14 * c.t_end) ? c.t_end : t + h;
    while (!out.done() && out.next_time() <= t_new) {
      const double ts = out.next_time();
      if (ts == t_new) {
        sample = ynew;
      } else if (ts == t) {
        sample = y;
      } else {
        rk.dense((ts - t) / h, sample);
      }
      out.emit(sample);
    }

    double fac = fac11 / std::pow(err_old, c.controller_beta);
    fac = std::clamp(fac / c.safety, 1.0 / c.max_factor, 1.0 / c.min_factor);
    double h_new = h / fac;
    if (last_rejected) h_new = std::min(h_new, h);
    err_old = std::max(err, 1e-4);
    last_rejected = false;

    // ynew was clamped after its derivative was evaluated; re-evaluate only if it changed.
    if (clamped > 0.0) {
      f(ynew, k1, t_new);
    } else {
      k1.swap(rk.last_derivative());
    }
    y.swap(ynew);
    t = t_new;
    h = h_new;
  }
}

void integrate_fixed(const AugmentedSystem& f, std::vector<double> y, const SolverConfig& c,
                     double h, TrajectoryBuilder& out, const CoagulationKernel& kernel,
                     const std::atomic<bool>* cancel) {
  const std::size_t n = y.size();
  const std::size_t k = n - 1;
  std::vector<double> s1(n), s2(n), s3(n), s4(n), tmp(n);
  auto rk4 = [&](double t, double dt) {
    f(y, s1, t);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * s1[i];
    f(tmp, s2, t + 0.5 * dt);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * s2[i];
    f(tmp, s3, t + 0.5 * dt);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * s3[i];
    f(tmp, s4, t + dt);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += dt / 6.0 * (s1[i] + 2.0 * s2[i] + 2.0 * s3[i] + s4[i]);
    }
    require_finite(y, t + dt, "state after RK4 step");
    out.stats().clamped_mass += clamp_all_negatives(std::span<double>(y).first(k));
    record_step(out.stats(), dt);
  };

  out.emit(y);
  double t_start = 0.0;
  while (!out.done()) {
    const double t_stop = out.next_time();
    const double span = t_stop - t_start;
    const auto full = static_cast<std::size_t>(std::floor(span / h + 1e-9));
    for (std::size_t m = 0; m < full; ++m) {
      check_cancel(cancel, out, kernel, c);
      rk4(t_start + static_cast<double>(m) * h, h);
    }
    const double rest = span - static_cast<double>(full) * h;
    if (rest > 1e-9 * h) rk4(t_start + static_cast<double>(full) * h, rest);
    out.emit(y);
    t_start = t_stop;
  }
}

}  // namespace

StepResult step(const SizeDistribution& state, const CoagulationKernel& kernel, double h,
                const SolverConfig& config) {
  if (!(h > 0.0) || h > config.max_step) throw ContractError("step size must lie in (0, max_step]");
  const std::size_t k = state.truncation();
  StepStats stats;
  AugmentedSystem f(kernel, k, stats);
  std::vector<double> y(state.values().begin(), state.values().end());
  y.push_back(0.0);
  std::vector<double> k1(k + 1);
  f(y, k1, state.time());
  Dopri5 rk(f, config);
  const double err = rk.attempt(state.time(), y, k1, h);
  auto& ynew = rk.result();
  const bool error_ok = err <= 1.0;
  const double clamped =
      error_ok ? clamp_negatives(std::span<double>(ynew).first(k), config.positivity_guard())
               : 0.0;
  if (!error_ok || clamped < 0.0) return {state, err, false};
  ynew.resize(k);
  return {SizeDistribution(std::move(ynew), state.time() + h), err, true};
}

Trajectory integrate(const SizeDistribution& init, const CoagulationKernel& kernel,
                     const SolverConfig& config, const std::atomic<bool>* cancel) {
  config.validate();
  const std::size_t k = init.truncation();
  if (k > kernel.max_size()) {
    throw DomainError("truncation k exceeds the extent of kernel '" + kernel.name() + "'");
  }
  TrajectoryBuilder out(k, config);
  AugmentedSystem f(kernel, k, out.stats());
  std::vector<double> y(init.values().begin(), init.values().end());
  y.push_back(0.0);

  if (cancel == nullptr) cancel = config.cancel;
  if (const auto* fixed = std::get_if<FixedStepMode>(&config.mode)) {
    integrate_fixed(f, std::move(y), config, fixed->h, out, kernel, cancel);
  } else {
    integrate_adaptive(f, std::move(y), config, out, kernel, cancel);
  }
  Trajectory traj = std::move(out.trajectory());
  annotate(traj, kernel, config.diagnostics);
  return traj;
}

}  // namespace coagkin
