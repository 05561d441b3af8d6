#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coagkin/report.hpp"

namespace coagkin {

enum class WeightClass { G1, G1_infinity };

std::string to_string(WeightClass c);

/// Nonnegative convex weight G with G(0) = 0, G'(0) >= 0 and concave G'.
///
/// Two representations: the power x^p with p in [1, 2], and a piecewise form
/// where G' is the piecewise-linear interpolant of (knots, derivative_values),
/// extended past the last knot with the last slope, and G is its exact integral.
class ConvexWeight {
 public:
  enum class Kind { power, piecewise };

  static ConvexWeight power(double p);
  /// Validates knots[0] = 0, strictly ascending knots, nondecreasing derivative
  /// values and nonincreasing segment slopes (concave G'). Throws DomainError.
  static ConvexWeight piecewise(std::vector<double> knots, std::vector<double> derivative_values,
                                WeightClass class_tag);
  static ConvexWeight from_json(const nlohmann::json& j);

  double value(double x) const;
  double derivative(double x) const;

  Kind kind() const noexcept { return kind_; }
  WeightClass class_tag() const noexcept { return class_tag_; }
  double exponent() const noexcept { return exponent_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& derivative_values() const noexcept { return derivative_values_; }
  std::string label() const;

  nlohmann::json to_json() const;

 private:
  ConvexWeight() = default;
  std::size_t segment(double x) const noexcept;

  Kind kind_ = Kind::power;
  WeightClass class_tag_ = WeightClass::G1;
  double exponent_ = 1.0;
  std::vector<double> knots_;
  std::vector<double> derivative_values_;
  std::vector<double> slopes_;
  std::vector<double> cumulative_;  // G at each knot
};

/// Samples G(0) = 0, G'(0) >= 0, monotone G', midpoint convexity of G and midpoint
/// concavity of G' on (0, x_max]; for G1_infinity also that G(x)/x increases
/// strictly along the knots (or a doubling grid for powers) and exceeds 10.
ExperimentReport check_weight_invariants(const ConvexWeight& weight, double x_max,
                                         std::size_t samples = 2000, std::uint64_t seed = 7);

/// Exhaustive check of (i+j)(G(i+j) - G(i) - G(j)) <= 2(i G(j) + j G(i)) for
/// 1 <= i, j <= max_size. Comparisons allow rounding of order 64 ulp of the
/// terms involved; metrics report the largest LHS/RHS ratio.
ExperimentReport check_weight_inequality(const ConvexWeight& weight, std::size_t max_size);

/// Result of the de la Vallee-Poussin construction for a size-indexed sequence.
struct DlvpWeight {
  ConvexWeight weight;
  std::vector<std::size_t> tail_thresholds;  // n_m, m = 0, 1, ... (n_0 = 1)
  std::vector<double> tail_masses;           // sum_{i >= n_m} i x_i
  double certified_bound = 0.0;              // sum_m (m+1) * tail_masses[m]
  bool degenerate = false;                   // zero-mass input, identity weight returned
};

/// Builds a superlinear G in G1_infinity with sum_i G(i) x_i finite for the given
/// nonnegative sequence (x[i-1] is the weight of size i).
///
/// Thresholds n_m are the smallest sizes with sum_{i >= n_m} i x_i <= tail_budget 2^-m.
/// G' is piecewise linear with G'(p_m) = m at knots p_0 = 0 and p_m >= n_m, knot gaps
/// nondecreasing. Hence G' <= m+1 below n_{m+1} and G(i) <= (m+1) i there, which gives
/// sum_i G(i) x_i <= sum_m (m+1) tail(n_m).
DlvpWeight construct_dlvp(std::span<const double> sequence, double tail_budget = 1.0);

}  // namespace coagkin
