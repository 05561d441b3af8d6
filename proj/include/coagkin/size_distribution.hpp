#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace coagkin {

/// Truncated concentration vector (xi_1, ..., xi_k) at a time stamp.
/// Storage is 0-based: values()[i - 1] is the concentration of size i.
class SizeDistribution {
 public:
  /// Throws DomainError for k < 2 or negative entries, NumericError for non-finite ones.
  explicit SizeDistribution(std::vector<double> values, double time = 0.0);

  static SizeDistribution zeros(std::size_t k, double time = 0.0);
  /// xi_1 = mass_scale, all others zero.
  static SizeDistribution monomer(std::size_t k, double mass_scale = 1.0);
  /// xi_i = mass_scale * ratio^i.
  static SizeDistribution geometric(std::size_t k, double ratio, double mass_scale = 1.0);

  std::size_t truncation() const noexcept { return values_.size(); }
  double time() const noexcept { return time_; }
  std::span<const double> values() const noexcept { return values_; }
  /// Concentration of clusters of size i (1-based).
  double concentration(std::size_t i) const { return values_.at(i - 1); }

  SizeDistribution scaled(double factor) const;
  SizeDistribution with_time(double time) const;

 private:
  std::vector<double> values_;
  double time_;
};

/// Test weights (psi_1, ..., psi_q) for the summation identities, 0-based storage.
/// The polynomial growth bound |psi_i| <= C i^p is recorded as metadata.
struct TestSequence {
  std::vector<double> values;
  double growth_constant = 1.0;
  double growth_power = 0.0;

  std::size_t length() const noexcept { return values.size(); }
  double at_size(std::size_t i) const { return values.at(i - 1); }

  static TestSequence from_rule(std::size_t length, const std::function<double(std::size_t)>& rule,
                                double growth_constant = 1.0, double growth_power = 0.0);
  static TestSequence constant(std::size_t length, double c);
  /// psi_i = i^p
  static TestSequence power(std::size_t length, double p);
};

}  // namespace coagkin
