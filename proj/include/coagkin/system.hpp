#pragma once

#include <span>
#include <vector>

#include "coagkin/kernel.hpp"
#include "coagkin/size_distribution.hpp"

namespace coagkin {

/// Right-hand side of the truncated Safronov-Dubovskii system: for 1 <= i <= k,
///
///   d xi_i/dt = xi_{i-1} S_{i-1} - xi_i S_i - xi_i T_i,
///   S_i = sum_{j<=i} j gamma(i,j) xi_j,   T_i = sum_{j=i}^{k} gamma(i,j) xi_j.
///
/// Separable kernels use O(k) prefix/suffix sums; other kernels use the direct
/// O(k^2) loop, parallel over rows with OpenMP. Every row is reduced serially in
/// ascending j, so results do not depend on the worker count.
std::vector<double> rhs(const SizeDistribution& state, const CoagulationKernel& kernel);

/// Span form used by the integrator. `xi.size() == out.size() == k`.
/// Throws NumericError (time = `time`) if `xi` holds a non-finite entry.
void rhs_into(std::span<const double> xi, const CoagulationKernel& kernel, std::span<double> out,
              double time = 0.0);

/// Mass leaving through the truncation boundary per unit time,
/// (k+1) xi_k S_k = -sum_i i * rhs_i.
double boundary_outflux(std::span<const double> xi, const CoagulationKernel& kernel);

/// Weak form of the truncated system for weights psi of length k:
///   sum_{i<k} sum_{j<=i} j psi_{i+1} gamma xi_i xi_j - sum_{i<=k} sum_{j<=i} (j psi_i + psi_j) gamma xi_i xi_j.
/// Equals sum_i psi_i rhs_i.
double weak_form_rate(const TestSequence& psi, const SizeDistribution& state,
                      const CoagulationKernel& kernel);

/// Sum of absolute values of the terms in weak_form_rate; the natural scale for
/// comparing it against sum_i psi_i rhs_i.
double weak_form_magnitude(const TestSequence& psi, const SizeDistribution& state,
                           const CoagulationKernel& kernel);

/// Rate of change of sum_{i<=q} phi_i xi_i via the partial-sum identity over the
/// index sets P1 = {i<q, j<=i}, P2 = {i<=q, j<=i}, P3 = {q<i<=k, j<=q}.
/// Requires q < k and phi.length() >= q.
double finite_identity_rate(const TestSequence& phi, const SizeDistribution& state,
                            const CoagulationKernel& kernel, std::size_t q);

namespace reference {

/// Serial, term-by-term evaluation of the truncated RHS for any kernel.
/// Kept as the oracle for rhs()/rhs_into() and as the benchmark baseline.
void rhs_into(std::span<const double> xi, const CoagulationKernel& kernel, std::span<double> out);
std::vector<double> rhs(const SizeDistribution& state, const CoagulationKernel& kernel);

}  // namespace reference

}  // namespace coagkin
