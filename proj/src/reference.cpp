#include <cstddef>

#include "coagkin/system.hpp"

namespace coagkin::reference {

void rhs_into(std::span<const double> xi, const CoagulationKernel& kernel, std::span<double> out) {
  const std::size_t k = xi.size();
  for (std::size_t i = 1; i <= k; ++i) {
    double birth = 0.0;
    if (i > 1) {
      for (std::size_t j = 1; j <= i - 1; ++j) {
        birth += static_cast<double>(j) * kernel.rate(i - 1, j) * xi[j - 1];
      }
      birth *= xi[i - 2];
    }
    double growth_loss = 0.0;
    for (std::size_t j = 1; j <= i; ++j) {
      growth_loss += static_cast<double>(j) * kernel.rate(i, j) * xi[j - 1];
    }
    growth_loss *= xi[i - 1];
    double shatter_loss = 0.0;
    for (std::size_t j = i; j <= k; ++j) {
      shatter_loss += kernel.rate(i, j) * xi[i - 1] * xi[j - 1];
    }
    out[i - 1] = birth - growth_loss - shatter_loss;
  }
}

std::vector<double> rhs(const SizeDistribution& state, const CoagulationKernel& kernel) {
  std::vector<double> out(state.truncation());
  reference::rhs_into(state.values(), kernel, std::span<double>(out));
  return out;
}

}  // namespace coagkin::reference
