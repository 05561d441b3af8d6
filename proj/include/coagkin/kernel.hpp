#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coagkin/report.hpp"

namespace coagkin {

/// Symmetric matrix stored as its dense lower triangle (i >= j), 1-based sizes.
class SymmetricTable {
 public:
  SymmetricTable() = default;
  explicit SymmetricTable(std::size_t max_size);

  std::size_t max_size() const noexcept { return max_size_; }

  double get(std::size_t i, std::size_t j) const noexcept {
    return i >= j ? data_[offset(i, j)] : data_[offset(j, i)];
  }
  void set(std::size_t i, std::size_t j, double value);

  /// Rows `i,j,gamma` with i >= j; optional header line and `#` comments.
  /// Every entry of the lower triangle up to max(i) must be present.
  static SymmetricTable load_csv(const std::filesystem::path& path);

 private:
  static std::size_t offset(std::size_t i, std::size_t j) noexcept {
    return (i - 1) * i / 2 + (j - 1);
  }

  std::size_t max_size_ = 0;
  std::vector<double> data_;
};

enum class KernelType { constant, additive, power, product, table };

std::string to_string(KernelType type);

/// Hypothesis constants declared for a kernel. They are checked, never inferred.
struct KernelConstants {
  double growth_A = 1.0;                  // gamma(i,j) <= A (i + j)
  std::optional<double> power_delta;      // gamma(i,j) <= A (i^delta + j^delta)
  std::optional<double> lower_bound_zeta; // gamma(i,j) >= zeta
};

/// Symmetric, nonnegative collision rate gamma(i,j) on positive integer sizes.
class CoagulationKernel {
 public:
  /// gamma = c
  static CoagulationKernel constant(double c, KernelConstants constants,
                                    std::string name = "constant");
  /// gamma = a (i + j)
  static CoagulationKernel additive(double a, KernelConstants constants,
                                    std::string name = "additive");
  /// gamma = a (i^e + j^e)
  static CoagulationKernel power_sum(double a, double exponent, KernelConstants constants,
                                     std::string name = "power");
  /// gamma = a i j. Violates the linear growth bound; kept for admissibility tests.
  static CoagulationKernel product(double a, KernelConstants constants,
                                   std::string name = "product");
  static CoagulationKernel tabulated(SymmetricTable table, KernelConstants constants,
                                     std::string name = "table");

  /// Checked evaluation; throws DomainError for size 0 or beyond a table's extent.
  double operator()(std::size_t i, std::size_t j) const;

  /// Unchecked evaluation for hot loops; requires 1 <= i, j <= max_size().
  double rate(std::size_t i, std::size_t j) const noexcept;

  /// True when gamma(i,j) = scale * (f(i) + f(j)), enabling O(k) prefix-sum RHS evaluation.
  bool separable() const noexcept;
  double separable_scale() const noexcept { return coefficient_; }
  double size_factor(std::size_t i) const noexcept;

  KernelType type() const noexcept { return type_; }
  const std::string& name() const noexcept { return name_; }
  const KernelConstants& constants() const noexcept { return constants_; }
  double coefficient() const noexcept { return coefficient_; }
  double exponent() const noexcept { return exponent_; }
  /// Largest size the kernel is defined for (tables are finite).
  std::size_t max_size() const noexcept;
  const SymmetricTable* table() const noexcept {
    return type_ == KernelType::table ? &table_ : nullptr;
  }

 private:
  CoagulationKernel(KernelType type, double coefficient, double exponent,
                    KernelConstants constants, std::string name);

  KernelType type_;
  double coefficient_;
  double exponent_;
  KernelConstants constants_;
  std::string name_;
  SymmetricTable table_;
};

/// Exhaustively checks nonnegativity, symmetry, and the declared growth,
/// power and lower bounds over 1 <= i, j <= max_size (row-major scan).
ExperimentReport check_admissibility(const CoagulationKernel& kernel, std::size_t max_size);

/// Built-in admissible kernels: constant, additive, power-sum and a tabulated
/// Brownian kernel. Each passes check_admissibility with its declared constants.
std::vector<CoagulationKernel> kernel_catalog();

/// Brownian collision kernel (i^(1/3) + j^(1/3)) (i^(-1/3) + j^(-1/3)) tabulated up to `max_size`.
SymmetricTable brownian_table(std::size_t max_size);

/// Default admissibility grid for runs up to truncation k.
constexpr std::size_t admissibility_grid(std::size_t truncation_k) noexcept {
  return 4 * truncation_k;
}

}  // namespace coagkin
