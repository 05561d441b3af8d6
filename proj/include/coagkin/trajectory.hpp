#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "coagkin/size_distribution.hpp"

namespace coagkin {

/// Per-sample moments and truncation indicators.
struct DiagnosticsRecord {
  double time = 0.0;
  double moment_0 = 0.0;  // total number
  double moment_1 = 0.0;  // total mass
  std::map<double, double> moment_m;          // order -> sum i^m xi_i
  std::map<std::string, double> g_moments;    // weight label -> sum G(i) xi_i
  double tail_mass_fraction = 0.0;            // sum_{i > k/2} i xi_i / M1
  double rhs_sup = 0.0;                       // max_i |d xi_i / dt|
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected_error = 0;
  std::size_t rejected_positivity = 0;
  std::size_t rhs_evaluations = 0;
  double min_step = 0.0;
  double max_step = 0.0;
  /// sum over clamping events of i * |negative value| set to zero.
  double clamped_mass = 0.0;

  std::size_t rejected() const noexcept { return rejected_error + rejected_positivity; }
};

/// Time-ordered samples of one run. `boundary_loss[n]` is the mass that has left
/// through the truncation boundary by `samples[n].time()`, integrated alongside the state.
struct Trajectory {
  std::vector<SizeDistribution> samples;
  std::vector<double> boundary_loss;
  std::vector<DiagnosticsRecord> diagnostics;
  /// max over samples of |d xi_i/dt| for each size i (0-based).
  std::vector<double> rhs_sup_per_size;
  StepStats step_stats;

  bool empty() const noexcept { return samples.empty(); }
  const SizeDistribution& initial() const { return samples.front(); }
  const SizeDistribution& final() const { return samples.back(); }
};

}  // namespace coagkin
