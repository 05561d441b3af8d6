#pragma once

#include <atomic>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "coagkin/diagnostics.hpp"
#include "coagkin/kernel.hpp"
#include "coagkin/size_distribution.hpp"
#include "coagkin/trajectory.hpp"

namespace coagkin {

struct AdaptiveMode {};

/// Classical RK4 with constant step h (shortened only to land on sample times).
struct FixedStepMode {
  double h = 1e-3;
};

struct SolverConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double t_end = 1.0;
  double max_step = std::numeric_limits<double>::infinity();
  double positivity_floor = 1e-14;
  std::variant<AdaptiveMode, FixedStepMode> mode = AdaptiveMode{};
  std::vector<double> sample_times{0.0, 1.0};

  // PI step-size controller.
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 5.0;
  double controller_beta = 0.04;
  std::optional<double> initial_step;
  std::size_t max_steps = 50'000'000;

  DiagnosticsOptions diagnostics;
  /// Cancellation flag polled between steps when integrate() is not given one.
  const std::atomic<bool>* cancel = nullptr;

  /// Throws ContractError on invalid tolerances, times or sample grid.
  void validate() const;

  bool adaptive() const noexcept { return std::holds_alternative<AdaptiveMode>(mode); }
  double positivity_guard() const noexcept { return positivity_floor * 1e3; }
  double min_step() const noexcept { return 1e-12 * t_end; }

  /// `intervals + 1` equispaced samples over [0, t_end].
  static std::vector<double> uniform_samples(double t_end, std::size_t intervals);
};

struct StepResult {
  SizeDistribution new_state;
  double error_estimate;
  bool accepted;
};

/// One Dormand-Prince 5(4) step from `state`. Accepted iff the weighted max-norm error
/// is <= 1 and no component falls below -positivity_guard(); on acceptance, entries in
/// [-guard, 0) are clamped to zero. A rejected step returns `state` unchanged.
StepResult step(const SizeDistribution& state, const CoagulationKernel& kernel, double h,
                const SolverConfig& config);

/// Step size underflow: repeated rejection drove h below min_step.
class IntegrationStalled : public std::runtime_error {
 public:
  IntegrationStalled(const std::string& what, SizeDistribution last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}

  const SizeDistribution& last_good_state() const noexcept { return last_good_; }

 private:
  SizeDistribution last_good_;
};

/// Cancellation request observed between steps; carries the samples emitted so far.
class IntegrationInterrupted : public std::runtime_error {
 public:
  IntegrationInterrupted(Trajectory partial)
      : std::runtime_error("integration interrupted"), partial_(std::move(partial)) {}

  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Integrates the truncated system from `init` (taken at t = 0) to config.t_end.
///
/// Adaptive mode: Dormand-Prince 5(4) with PI control, positivity guard and
/// 4th-order continuous extension for samples. Fixed-step mode: classical RK4 oracle.
/// The boundary outflux is integrated as an extra component of the ODE.
Trajectory integrate(const SizeDistribution& init, const CoagulationKernel& kernel,
                     const SolverConfig& config, const std::atomic<bool>* cancel = nullptr);

}  // namespace coagkin
