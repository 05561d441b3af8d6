#include "coagkin/system.hpp"

#include <cmath>
#include <string>

#include "coagkin/compensated.hpp"
#include "coagkin/errors.hpp"

namespace coagkin {

namespace {

// Below this size the OpenMP fork/join costs more than the O(k^2) loop.
constexpr std::size_t kParallelThreshold = 128;

void check_inputs(std::span<const double> xi, const CoagulationKernel& kernel,
                  std::span<double> out, double time) {
  if (out.size() != xi.size()) throw ContractError("rhs output length must equal k");
  if (xi.size() > kernel.max_size()) {
    throw DomainError("truncation k=" + std::to_string(xi.size()) + " exceeds kernel '" +
                      kernel.name() + "' extent " + std::to_string(kernel.max_size()));
  }
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (!std::isfinite(xi[i])) {
      throw NumericError("non-finite concentration at size " + std::to_string(i + 1), time);
    }
  }
}

void assemble_rows(std::span<const double> xi, const std::vector<double>& growth,
                   const std::vector<double>& shatter, std::span<double> out) {
  const auto k = static_cast<std::ptrdiff_t>(xi.size());
#pragma omp parallel for schedule(static) if (xi.size() >= kParallelThreshold)
  for (std::ptrdiff_t r = 0; r < k; ++r) {
    const double birth = r > 0 ? xi[r - 1] * growth[r - 1] : 0.0;
    out[r] = birth - xi[r] * growth[r] - xi[r] * shatter[r];
  }
}

void separable_rhs(std::span<const double> xi, const CoagulationKernel& kernel,
                   std::span<double> out) {
  const std::size_t k = xi.size();
  const double a = kernel.separable_scale();
  thread_local std::vector<double> factor, growth, shatter;
  factor.resize(k);
  growth.resize(k);
  shatter.resize(k);
  for (std::size_t i = 1; i <= k; ++i) factor[i - 1] = kernel.size_factor(i);

  // growth[i] = S_i = a (f_i P_i + Q_i), P_i = sum_{j<=i} j xi_j, Q_i = sum_{j<=i} j f_j xi_j
  double p = 0.0, q = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double jx = static_cast<double>(i) * xi[i - 1];
    p += jx;
    q += jx * factor[i - 1];
    growth[i - 1] = a * (factor[i - 1] * p + q);
  }
  // shatter[i] = T_i = a (f_i R_i + U_i), R_i = sum_{j>=i} xi_j, U_i = sum_{j>=i} f_j xi_j
  double r = 0.0, u = 0.0;
  for (std::size_t i = k; i >= 1; --i) {
    r += xi[i - 1];
    u += factor[i - 1] * xi[i - 1];
    shatter[i - 1] = a * (factor[i - 1] * r + u);
  }
  assemble_rows(xi, growth, shatter, out);
}

void direct_rhs(std::span<const double> xi, const CoagulationKernel& kernel,
                std::span<double> out) {
  const std::size_t k = xi.size();
  thread_local std::vector<double> growth, shatter;
  growth.resize(k);
  shatter.resize(k);
  // thread_local names would resolve per worker inside the parallel region.
  double* const growth_out = growth.data();
  double* const shatter_out = shatter.data();
  const auto rows = static_cast<std::ptrdiff_t>(k);
  // Row i costs O(k); dynamic chunks balance the triangular S/T split.
#pragma omp parallel for schedule(dynamic, 16) if (k >= kParallelThreshold)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const std::size_t i = static_cast<std::size_t>(r) + 1;
    double s = 0.0;
    for (std::size_t j = 1; j <= i; ++j) s += static_cast<double>(j) * kernel.rate(i, j) * xi[j - 1];
    double t = 0.0;
    for (std::size_t j = i; j <= k; ++j) t += kernel.rate(i, j) * xi[j - 1];
    growth_out[r] = s;
    shatter_out[r] = t;
  }
  assemble_rows(xi, growth, shatter, out);
}

}  // namespace

void rhs_into(std::span<const double> xi, const CoagulationKernel& kernel, std::span<double> out,
              double time) {
  check_inputs(xi, kernel, out, time);
  if (kernel.separable()) {
    separable_rhs(xi, kernel, out);
  } else {
    direct_rhs(xi, kernel, out);
  }
}

std::vector<double> rhs(const SizeDistribution& state, const CoagulationKernel& kernel) {
  std::vector<double> out(state.truncation());
  rhs_into(state.values(), kernel, out, state.time());
  return out;
}

double boundary_outflux(std::span<const double> xi, const CoagulationKernel& kernel) {
  const std::size_t k = xi.size();
  if (k == 0 || xi[k - 1] == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * kernel.rate(k, j) * xi[j - 1];
  return static_cast<double>(k + 1) * xi[k - 1] * s;
}

double weak_form_rate(const TestSequence& psi, const SizeDistribution& state,
                      const CoagulationKernel& kernel) {
  const std::size_t k = state.truncation();
  if (psi.length() != k) {
    throw ContractError("weak_form_rate: psi has length " + std::to_string(psi.length()) +
                        ", state has k=" + std::to_string(k));
  }
  const auto xi = state.values();
  const auto& w = psi.values;
  CompensatedSum gain, loss;
  for (std::size_t i = 1; i <= k; ++i) {
    for (std::size_t j = 1; j <= i; ++j) {
      const double g = kernel.rate(i, j) * xi[i - 1] * xi[j - 1];
      const double jd = static_cast<double>(j);
      if (i < k) gain.add(jd * w[i] * g);
      loss.add((jd * w[i - 1] + w[j - 1]) * g);
    }
  }
  return gain.value() - loss.value();
}

double weak_form_magnitude(const TestSequence& psi, const SizeDistribution& state,
                           const CoagulationKernel& kernel) {
  const std::size_t k = state.truncation();
  if (psi.length() != k) throw ContractError("weak_form_magnitude: length mismatch");
  const auto xi = state.values();
  const auto& w = psi.values;
  CompensatedSum total;
  for (std::size_t i = 1; i <= k; ++i) {
    for (std::size_t j = 1; j <= i; ++j) {
      const double g = kernel.rate(i, j) * xi[i - 1] * xi[j - 1];
      const double jd = static_cast<double>(j);
      if (i < k) total.add(std::abs(jd * w[i] * g));
      total.add((std::abs(jd * w[i - 1]) + std::abs(w[j - 1])) * g);
    }
  }
  return total.value();
}

double finite_identity_rate(const TestSequence& phi, const SizeDistribution& state,
                            const CoagulationKernel& kernel, std::size_t q) {
  const std::size_t k = state.truncation();
  if (q == 0 || q >= k) {
    throw ContractError("finite_identity_rate: need 1 <= q < k (q=" + std::to_string(q) +
                        ", k=" + std::to_string(k) + ")");
  }
  if (phi.length() < q) throw ContractError("finite_identity_rate: phi shorter than q");
  const auto xi = state.values();
  const auto& w = phi.values;

  CompensatedSum p1, p2, p3;
  for (std::size_t i = 1; i <= q; ++i) {
    for (std::size_t j = 1; j <= i; ++j) {
      const double g = kernel.rate(i, j) * xi[i - 1] * xi[j - 1];
      const double jd = static_cast<double>(j);
      if (i + 1 <= q) p1.add(jd * w[i] * g);
      p2.add((jd * w[i - 1] + w[j - 1]) * g);
    }
  }
  // The untruncated P3 runs over all i > q; xi_i vanishes beyond k in the truncated model.
  for (std::size_t i = q + 1; i <= k; ++i) {
    for (std::size_t j = 1; j <= q; ++j) {
      p3.add(w[j - 1] * kernel.rate(i, j) * xi[i - 1] * xi[j - 1]);
    }
  }
  return p1.value() - p2.value() - p3.value();
}

}  // namespace coagkin
