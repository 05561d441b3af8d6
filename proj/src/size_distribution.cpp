#include "coagkin/size_distribution.hpp"

#include <cmath>
#include <string>

#include "coagkin/errors.hpp"

namespace coagkin {

SizeDistribution::SizeDistribution(std::vector<double> values, double time)
    : values_(std::move(values)), time_(time) {
  if (values_.size() < 2) throw DomainError("truncation k must be at least 2");
  if (!std::isfinite(time_) || time_ < 0.0) throw DomainError("time must be finite and >= 0");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NumericError("non-finite concentration at size " + std::to_string(i + 1), time_);
    }
    if (values_[i] < 0.0) {
      throw DomainError("negative concentration at size " + std::to_string(i + 1));
    }
  }
}

SizeDistribution SizeDistribution::zeros(std::size_t k, double time) {
  return SizeDistribution(std::vector<double>(k, 0.0), time);
}

SizeDistribution SizeDistribution::monomer(std::size_t k, double mass_scale) {
  std::vector<double> v(k, 0.0);
  if (k > 0) v[0] = mass_scale;
  return SizeDistribution(std::move(v));
}

SizeDistribution SizeDistribution::geometric(std::size_t k, double ratio, double mass_scale) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("geometric ratio must lie in (0, 1)");
  std::vector<double> v(k);
  double p = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    p *= ratio;
    v[i] = mass_scale * p;
  }
  return SizeDistribution(std::move(v));
}

SizeDistribution SizeDistribution::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return SizeDistribution(std::move(v), time_);
}

SizeDistribution SizeDistribution::with_time(double time) const {
  return SizeDistribution(values_, time);
}

TestSequence TestSequence::from_rule(std::size_t length,
                                     const std::function<double(std::size_t)>& rule,
                                     double growth_constant, double growth_power) {
  TestSequence s;
  s.values.resize(length);
  for (std::size_t i = 1; i <= length; ++i) s.values[i - 1] = rule(i);
  s.growth_constant = growth_constant;
  s.growth_power = growth_power;
  return s;
}

TestSequence TestSequence::constant(std::size_t length, double c) {
  return from_rule(length, [c](std::size_t) { return c; }, std::abs(c), 0.0);
}

TestSequence TestSequence::power(std::size_t length, double p) {
  return from_rule(
      length, [p](std::size_t i) { return std::pow(static_cast<double>(i), p); }, 1.0, p);
}

}  // namespace coagkin
