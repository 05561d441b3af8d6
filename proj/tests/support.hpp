#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "coagkin/kernel.hpp"
#include "coagkin/size_distribution.hpp"

namespace testing {

/// Nonnegative state with some exact zeros and a random decay profile.
inline coagkin::SizeDistribution random_state(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double decay = 5.0 * unit(rng);
  std::vector<double> xi(k);
  for (std::size_t i = 0; i < k; ++i) {
    xi[i] = unit(rng) < 0.25 ? 0.0 : unit(rng) * std::exp(-decay * static_cast<double>(i) / k);
  }
  return coagkin::SizeDistribution(std::move(xi));
}

inline std::vector<coagkin::CoagulationKernel> rhs_kernels() {
  auto out = coagkin::kernel_catalog();
  out.push_back(coagkin::CoagulationKernel::constant(2.5, {2.5}, "constant_2.5"));
  out.push_back(coagkin::CoagulationKernel::power_sum(0.7, 0.25, {0.7, 0.25}, "power_0.25"));
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (stem + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
