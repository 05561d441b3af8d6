#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coagkin/integrator.hpp"
#include "coagkin/kernel.hpp"
#include "coagkin/report.hpp"
#include "coagkin/size_distribution.hpp"
#include "coagkin/trajectory.hpp"

namespace coagkin {

/// Initial data that extends consistently across truncation sizes.
struct InitialRule {
  enum class Kind { monomer, geometric, file };

  Kind kind = Kind::monomer;
  double ratio = 0.5;                // geometric: xi_i = mass_scale * ratio^i
  double mass_scale = 1.0;
  std::vector<double> data;          // file: xi_1, xi_2, ... (zero-padded to k)

  /// Throws ContractError if file data has nonzero entries beyond k.
  SizeDistribution at(std::size_t k) const;
  std::string describe() const;
};

/// Sample grid with `intervals` equal steps that also contains every time in `extra`.
std::vector<double> sample_grid(double t_end, std::size_t intervals,
                                const std::vector<double>& extra = {});

struct TruncationOptions {
  std::vector<std::size_t> k_list{16, 32, 64, 128};
  double t_end = 5.0;
  std::size_t sample_intervals = 10;
  double defect_threshold = 1e-6;   // relative to M1(0), applied at max k
  bool strict_decrease = true;
  double distance_noise = 10.0;     // distance floor in units of rel_tol * M1(0)
};

struct TruncationResult {
  ExperimentReport report;
  std::vector<std::size_t> k_list;
  std::vector<double> defects;
  std::vector<double> distances;  // between consecutive k; one fewer than k_list
};

/// Runs integrate at each k (concurrently) and checks that the mass defect shrinks
/// with k, that the solutions approach each other and that the defect at the
/// largest k is small.
TruncationResult truncation_convergence(const CoagulationKernel& kernel, const InitialRule& init,
                                        const TruncationOptions& options,
                                        const SolverConfig& solver);

struct DependenceOptions {
  double t_end = 2.0;
  std::size_t sample_intervals = 20;
  double uniqueness_tolerance = 1e-12;
  double envelope_limit = 1.0;
};

/// Integrates both initial states and checks D(t) = sum_i i |xi_i - eta_i| against
/// D(0) exp(C t) with C = 4 A (sup M_{1+delta} + M1(0)). Requires kernel delta.
ExperimentReport continuous_dependence(const CoagulationKernel& kernel,
                                       const SizeDistribution& init_a,
                                       const SizeDistribution& init_b,
                                       const DependenceOptions& options,
                                       const SolverConfig& solver);

struct PerturbationOptions {
  DependenceOptions dependence;
  double epsilon = 1e-6;
  std::size_t perturbed_size = 2;
  double linearity_tolerance = 0.1;  // relative deviation of D_final(eps/2)/D_final(eps) from 1/2
};

/// Full dependence study: identical inputs (uniqueness), base vs base + eps e_s
/// (envelope) and the eps/2 run (linear response).
ExperimentReport perturbation_study(const CoagulationKernel& kernel, const SizeDistribution& base,
                                    const PerturbationOptions& options,
                                    const SolverConfig& solver);

struct DecayOptions {
  double t_end = 100.0;
  std::size_t sample_intervals = 100;
  double envelope_slack = 0.01;
  double tol_conv = 1e-8;
  double tol_limit = 1e-4;
  std::size_t components = 5;
  double number_slack = 1e-9;  // relative to M0(0)
};

/// Long-time decay under gamma >= zeta: M0 monotone, Riccati envelope
/// M0(0) / (1 + zeta/2 M0(0) t), and convergence of the first components to zero.
ExperimentReport asymptotic_decay(const CoagulationKernel& kernel, const SizeDistribution& init,
                                  const DecayOptions& options, const SolverConfig& solver);

/// Named test sequences for the identity audit: zero, one, i, i2, alternating.
TestSequence phi_sequence(const std::string& name, std::size_t length);
std::vector<std::string> phi_names();

struct IdentityOptions {
  std::vector<std::string> phi{"one", "i", "i2", "alternating"};
  std::vector<std::size_t> q_list;  // empty: {k/4, k/2, k-1, k}
  double residual_factor = 10.0;    // residual limit = factor * rel_tol
  double adjoint_tolerance = 1e-12;
  std::size_t random_states = 0;
  std::uint64_t seed = 1;
};

/// Integrated identity audit on a trajectory: for each phi and q compares the
/// change of sum_{i<=q} phi_i xi_i with the composite-Simpson integral of its rate
/// (at every even sample), and checks the weak form against sum_i psi_i rhs_i.
ExperimentReport identity_audit(const Trajectory& traj, const CoagulationKernel& kernel,
                                const IdentityOptions& options, double rel_tol);

/// Pointwise weak-form adjoint check on `count` random nonnegative states of size k.
ExperimentReport adjoint_sweep(const CoagulationKernel& kernel, std::size_t k, std::size_t count,
                               std::uint64_t seed, double tolerance = 1e-12);

struct RescalingOptions {
  std::vector<double> alphas{0.5, 2.0};
  double t_end = 2.0;
  std::size_t sample_intervals = 10;
  double tolerance_factor = 10.0;  // limit = factor * rel_tol, relative to max |xi|
};

/// Constant kernel only: integrate(alpha xi)(t) = alpha integrate(xi)(alpha t).
ExperimentReport time_rescaling(const CoagulationKernel& kernel, const SizeDistribution& init,
                                const RescalingOptions& options, const SolverConfig& solver);

struct WeightsOptions {
  std::vector<double> powers{1.0, 1.5, 2.0};
  double sample_extent = 1e3;
  std::size_t inequality_size = 500;
  double tail_budget = 1.0;
  std::uint64_t seed = 7;
};

/// Power weights and the dlVP weight of `data`: invariants, the pair inequality,
/// and the brute-force bound sum_i G(i) x_i <= 2 tail_budget sum_m (m+1) 2^-m.
ExperimentReport weights_study(std::span<const double> data, const WeightsOptions& options);

}  // namespace coagkin
