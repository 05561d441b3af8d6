#include "coagkin/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "coagkin/errors.hpp"

namespace coagkin {

SymmetricTable::SymmetricTable(std::size_t max_size)
    : max_size_(max_size), data_(max_size * (max_size + 1) / 2, 0.0) {}

void SymmetricTable::set(std::size_t i, std::size_t j, double value) {
  if (i == 0 || j == 0 || i > max_size_ || j > max_size_) {
    throw DomainError("table index (" + std::to_string(i) + "," + std::to_string(j) +
                      ") outside 1.." + std::to_string(max_size_));
  }
  if (i < j) std::swap(i, j);
  data_[offset(i, j)] = value;
}

SymmetricTable SymmetricTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open kernel table");

  struct Entry {
    std::size_t i, j;
    double gamma;
  };
  std::vector<Entry> entries;
  std::size_t largest = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (std::isalpha(static_cast<unsigned char>(line[first]))) continue;  // header
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    long long i = 0, j = 0;
    double gamma = 0.0;
    if (!(fields >> i >> j >> gamma)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no),
                        "expected a row 'i,j,gamma'");
    }
    if (i < 1 || j < 1 || i < j) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no),
                        "rows must satisfy i >= j >= 1");
    }
    entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), gamma});
    largest = std::max(largest, static_cast<std::size_t>(i));
  }
  if (largest == 0) throw ConfigError(path.string(), "kernel table is empty");

  SymmetricTable table(largest);
  std::vector<bool> seen(table.data_.size(), false);
  for (const auto& e : entries) {
    table.set(e.i, e.j, e.gamma);
    seen[offset(e.i, e.j)] = true;
  }
  for (std::size_t i = 1; i <= largest; ++i) {
    for (std::size_t j = 1; j <= i; ++j) {
      if (!seen[offset(i, j)]) {
        throw ConfigError(path.string(), "missing entry (" + std::to_string(i) + "," +
                                             std::to_string(j) + ")");
      }
    }
  }
  return table;
}

std::string to_string(KernelType type) {
  switch (type) {
    case KernelType::constant:
      return "constant";
    case KernelType::additive:
      return "additive";
    case KernelType::power:
      return "power";
    case KernelType::product:
      return "product";
    case KernelType::table:
      return "table";
  }
  return "unknown";
}

CoagulationKernel::CoagulationKernel(KernelType type, double coefficient, double exponent,
                                     KernelConstants constants, std::string name)
    : type_(type),
      coefficient_(coefficient),
      exponent_(exponent),
      constants_(constants),
      name_(std::move(name)) {
  if (!(coefficient >= 0.0) || !std::isfinite(coefficient)) {
    throw DomainError("kernel coefficient must be finite and nonnegative");
  }
  if (!(constants.growth_A > 0.0)) throw DomainError("growth constant A must be positive");
  if (constants.power_delta && (*constants.power_delta < 0.0 || *constants.power_delta > 1.0)) {
    throw DomainError("power_delta must lie in [0, 1]");
  }
  if (constants.lower_bound_zeta && !(*constants.lower_bound_zeta > 0.0)) {
    throw DomainError("lower_bound_zeta must be positive");
  }
}

CoagulationKernel CoagulationKernel::constant(double c, KernelConstants constants,
                                              std::string name) {
  return {KernelType::constant, c, 0.0, constants, std::move(name)};
}

CoagulationKernel CoagulationKernel::additive(double a, KernelConstants constants,
                                              std::string name) {
  return {KernelType::additive, a, 1.0, constants, std::move(name)};
}

CoagulationKernel CoagulationKernel::power_sum(double a, double exponent,
                                               KernelConstants constants, std::string name) {
  if (!std::isfinite(exponent)) throw DomainError("power kernel exponent must be finite");
  return {KernelType::power, a, exponent, constants, std::move(name)};
}

CoagulationKernel CoagulationKernel::product(double a, KernelConstants constants,
                                             std::string name) {
  return {KernelType::product, a, 1.0, constants, std::move(name)};
}

CoagulationKernel CoagulationKernel::tabulated(SymmetricTable table, KernelConstants constants,
                                               std::string name) {
  if (table.max_size() == 0) throw DomainError("kernel table is empty");
  CoagulationKernel k{KernelType::table, 1.0, 0.0, constants, std::move(name)};
  k.table_ = std::move(table);
  return k;
}

std::size_t CoagulationKernel::max_size() const noexcept {
  return type_ == KernelType::table ? table_.max_size()
                                    : std::numeric_limits<std::size_t>::max();
}

double CoagulationKernel::operator()(std::size_t i, std::size_t j) const {
  if (i == 0 || j == 0) throw DomainError("cluster sizes are positive integers");
  if (i > max_size() || j > max_size()) {
    throw DomainError("kernel '" + name_ + "' is tabulated only up to size " +
                      std::to_string(max_size()));
  }
  return rate(i, j);
}

double CoagulationKernel::rate(std::size_t i, std::size_t j) const noexcept {
  const auto x = static_cast<double>(i);
  const auto y = static_cast<double>(j);
  switch (type_) {
    case KernelType::constant:
      return coefficient_;
    case KernelType::additive:
      return coefficient_ * (x + y);
    case KernelType::power:
      return coefficient_ * (std::pow(x, exponent_) + std::pow(y, exponent_));
    case KernelType::product:
      return coefficient_ * (x * y);
    case KernelType::table:
      return table_.get(i, j);
  }
  return 0.0;
}

bool CoagulationKernel::separable() const noexcept {
  return type_ == KernelType::constant || type_ == KernelType::additive ||
         type_ == KernelType::power;
}

double CoagulationKernel::size_factor(std::size_t i) const noexcept {
  switch (type_) {
    case KernelType::constant:
      return 0.5;
    case KernelType::additive:
      return static_cast<double>(i);
    case KernelType::power:
      return std::pow(static_cast<double>(i), exponent_);
    default:
      return 0.0;
  }
}

ExperimentReport check_admissibility(const CoagulationKernel& kernel, std::size_t max_size) {
  ExperimentReport report("admissibility");
  if (max_size < 2) throw ContractError("admissibility grid needs max_size >= 2");

  constexpr double kSlack = 1e-12;
  const auto& c = kernel.constants();
  report.set_metric("grid_max_size", static_cast<double>(max_size));
  report.set_metric("A", c.growth_A);
  if (c.power_delta) report.set_metric("delta", *c.power_delta);
  if (c.lower_bound_zeta) report.set_metric("zeta", *c.lower_bound_zeta);

  double violations = 0.0;
  double max_growth_ratio = 0.0;
  std::string first;
  auto violate = [&](std::size_t i, std::size_t j, const std::string& what) {
    if (violations == 0.0) {
      first = "(" + std::to_string(i) + "," + std::to_string(j) + "): " + what;
      report.set_metric("first_violation_i", static_cast<double>(i));
      report.set_metric("first_violation_j", static_cast<double>(j));
    }
    violations += 1.0;
  };

  const std::size_t extent = std::min(max_size, kernel.max_size());
  if (extent < max_size) {
    report.add_note("kernel defined only up to size " + std::to_string(extent));
    violate(extent + 1, 1, "outside kernel domain");
  }

  for (std::size_t i = 1; i <= extent; ++i) {
    for (std::size_t j = 1; j <= extent; ++j) {
      const double g = kernel.rate(i, j);
      const double x = static_cast<double>(i);
      const double y = static_cast<double>(j);
      const double growth = c.growth_A * (x + y);
      max_growth_ratio = std::max(max_growth_ratio, g / growth);
      std::ostringstream what;
      what.precision(17);
      if (!std::isfinite(g) || g < 0.0) {
        what << "gamma=" << g << " is not a nonnegative number";
      } else if (g != kernel.rate(j, i)) {
        what << "gamma(i,j)=" << g << " != gamma(j,i)=" << kernel.rate(j, i);
      } else if (g > growth * (1.0 + kSlack)) {
        what << "gamma=" << g << " > A(i+j)=" << growth;
      } else if (c.power_delta &&
                 g > c.growth_A * (std::pow(x, *c.power_delta) + std::pow(y, *c.power_delta)) *
                         (1.0 + kSlack)) {
        what << "gamma=" << g << " > A(i^delta+j^delta)";
      } else if (c.lower_bound_zeta && g < *c.lower_bound_zeta * (1.0 - kSlack)) {
        what << "gamma=" << g << " < zeta=" << *c.lower_bound_zeta;
      } else {
        continue;
      }
      violate(i, j, what.str());
    }
  }

  report.set_metric("max_gamma_over_A_i_plus_j", max_growth_ratio);
  report.check_at_most("violations", violations, 0.0);
  if (!first.empty()) report.add_note("first violation at " + first);
  return report;
}

SymmetricTable brownian_table(std::size_t max_size) {
  SymmetricTable table(max_size);
  for (std::size_t i = 1; i <= max_size; ++i) {
    const double a = std::cbrt(static_cast<double>(i));
    for (std::size_t j = 1; j <= i; ++j) {
      const double b = std::cbrt(static_cast<double>(j));
      table.set(i, j, (a + b) * (1.0 / a + 1.0 / b));
    }
  }
  return table;
}

std::vector<CoagulationKernel> kernel_catalog() {
  std::vector<CoagulationKernel> out;
  out.push_back(CoagulationKernel::constant(1.0, {1.0, 0.0, 1.0}, "constant"));
  out.push_back(CoagulationKernel::additive(1.0, {1.0, 1.0, 2.0}, "additive"));
  out.push_back(CoagulationKernel::power_sum(1.0, 0.5, {1.0, 0.5, 2.0}, "power"));
  // (a+b)(1/a+1/b) <= 2(a+b) iff 1/a + 1/b <= 2, true for a,b >= 1; minimum 4 on the diagonal.
  out.push_back(CoagulationKernel::tabulated(brownian_table(512), {2.0, 1.0 / 3.0, 4.0},
                                             "brownian_table"));
  return out;
}

}  // namespace coagkin
