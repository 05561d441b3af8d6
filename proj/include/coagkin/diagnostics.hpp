#pragma once

#include <string>
#include <utility>
#include <vector>

#include "coagkin/kernel.hpp"
#include "coagkin/report.hpp"
#include "coagkin/size_distribution.hpp"
#include "coagkin/trajectory.hpp"
#include "coagkin/weights.hpp"

namespace coagkin {

/// sum_i i^m xi_i with compensated summation. Requires m >= 0.
double moment(const SizeDistribution& state, double m);

/// sum_i G(i) xi_i
double g_moment(const SizeDistribution& state, const ConvexWeight& weight);

/// sum_{i > k/2} i xi_i / M1, or 0 for a massless state.
double tail_mass_fraction(const SizeDistribution& state);

struct DiagnosticsOptions {
  std::vector<double> moment_orders{2.0};
  std::vector<ConvexWeight> weights;
};

DiagnosticsRecord diagnose(const SizeDistribution& state, const CoagulationKernel& kernel,
                           const DiagnosticsOptions& options = {});

/// Recomputes traj.diagnostics and traj.rhs_sup_per_size.
void annotate(Trajectory& traj, const CoagulationKernel& kernel,
              const DiagnosticsOptions& options = {});

/// Gronwall check M_G(t) <= M_G(0) exp(C t) at every sample with C = 4 A M1(0).
/// Also reports the largest observed exponential rate log(M_G(t)/M_G(0))/t.
ExperimentReport check_moment_propagation(const Trajectory& traj, const ConvexWeight& weight,
                                          const CoagulationKernel& kernel);

/// Mass lost through the truncation boundary over the run.
double mass_defect(const Trajectory& traj);

struct MassBalance {
  double initial_mass = 0.0;
  double final_mass = 0.0;
  double moment_defect = 0.0;      // M1(0) - M1(T) from the samples
  double boundary_outflux = 0.0;   // integrated leak, equals moment_defect up to rounding
  double clamped_mass = 0.0;
};

MassBalance mass_balance(const Trajectory& traj);

/// M1 and M0 non-increasing along samples within `relative_slack * M1(0)` (resp. M0(0)),
/// plus nonnegativity of every sample.
ExperimentReport check_monotonicity(const Trajectory& traj, double relative_slack = 1e-9);

}  // namespace coagkin
