#include "coagkin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "coagkin/compensated.hpp"
#include "coagkin/errors.hpp"
#include "coagkin/system.hpp"

namespace coagkin {

double moment(const SizeDistribution& state, double m) {
  if (!(m >= 0.0)) throw ContractError("moment order must be >= 0");
  const auto xi = state.values();
  CompensatedSum sum;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double size = static_cast<double>(i + 1);
    const double w = m == 0.0 ? 1.0 : m == 1.0 ? size : std::pow(size, m);
    sum += w * xi[i];
  }
  return sum.value();
}

double g_moment(const SizeDistribution& state, const ConvexWeight& weight) {
  const auto xi = state.values();
  CompensatedSum sum;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    sum += weight.value(static_cast<double>(i + 1)) * xi[i];
  }
  return sum.value();
}

double tail_mass_fraction(const SizeDistribution& state) {
  const double total = moment(state, 1.0);
  if (total <= 0.0) return 0.0;
  const auto xi = state.values();
  CompensatedSum tail;
  for (std::size_t i = xi.size() / 2; i < xi.size(); ++i) {
    tail += static_cast<double>(i + 1) * xi[i];
  }
  return tail.value() / total;
}

namespace {

DiagnosticsRecord diagnose_with_rhs(const SizeDistribution& state,
                                    const DiagnosticsOptions& options,
                                    std::span<const double> derivative) {
  DiagnosticsRecord rec;
  rec.time = state.time();
  rec.moment_0 = moment(state, 0.0);
  rec.moment_1 = moment(state, 1.0);
  for (double m : options.moment_orders) rec.moment_m[m] = moment(state, m);
  for (const auto& w : options.weights) rec.g_moments[w.label()] = g_moment(state, w);
  rec.tail_mass_fraction = tail_mass_fraction(state);
  for (double d : derivative) rec.rhs_sup = std::max(rec.rhs_sup, std::abs(d));
  return rec;
}

}  // namespace

DiagnosticsRecord diagnose(const SizeDistribution& state, const CoagulationKernel& kernel,
                           const DiagnosticsOptions& options) {
  const auto derivative = rhs(state, kernel);
  return diagnose_with_rhs(state, options, derivative);
}

void annotate(Trajectory& traj, const CoagulationKernel& kernel,
              const DiagnosticsOptions& options) {
  traj.diagnostics.clear();
  traj.rhs_sup_per_size.clear();
  if (traj.empty()) return;
  traj.rhs_sup_per_size.assign(traj.initial().truncation(), 0.0);
  traj.diagnostics.reserve(traj.samples.size());
  for (const auto& sample : traj.samples) {
    const auto derivative = rhs(sample, kernel);
    for (std::size_t i = 0; i < derivative.size(); ++i) {
      traj.rhs_sup_per_size[i] = std::max(traj.rhs_sup_per_size[i], std::abs(derivative[i]));
    }
    traj.diagnostics.push_back(diagnose_with_rhs(sample, options, derivative));
  }
}

ExperimentReport check_moment_propagation(const Trajectory& traj, const ConvexWeight& weight,
                                          const CoagulationKernel& kernel) {
  if (traj.empty()) throw ContractError("moment propagation needs a nonempty trajectory");
  ExperimentReport report("moment_propagation");
  const double mass0 = moment(traj.initial(), 1.0);
  const double rate = 4.0 * kernel.constants().growth_A * mass0;
  const double g0 = g_moment(traj.initial(), weight);
  report.set_metric("C_safe", rate);
  report.set_metric("M_G_0", g0);

  double max_ratio = 0.0;
  double observed_rate = -std::numeric_limits<double>::infinity();
  for (const auto& sample : traj.samples) {
    const double g = g_moment(sample, weight);
    const double t = sample.time();
    if (g0 == 0.0) {
      if (g > 0.0) {
        max_ratio = std::numeric_limits<double>::infinity();
        report.add_note("M_G(0) = 0 but M_G(" + std::to_string(t) + ") > 0");
      }
      continue;
    }
    max_ratio = std::max(max_ratio, g / (g0 * std::exp(rate * t)));
    if (t > 0.0 && g > 0.0) observed_rate = std::max(observed_rate, std::log(g / g0) / t);
  }
  if (!std::isfinite(observed_rate) && observed_rate < 0.0) observed_rate = 0.0;
  report.set_metric("observed_rate", observed_rate);
  report.check_at_most("max_ratio", max_ratio, 1.0);
  return report;
}

double mass_defect(const Trajectory& traj) {
  if (traj.empty()) throw ContractError("mass defect needs a nonempty trajectory");
  if (traj.boundary_loss.size() == traj.samples.size()) return traj.boundary_loss.back();
  return moment(traj.initial(), 1.0) - moment(traj.final(), 1.0);
}

MassBalance mass_balance(const Trajectory& traj) {
  if (traj.empty()) throw ContractError("mass balance needs a nonempty trajectory");
  MassBalance b;
  b.initial_mass = moment(traj.initial(), 1.0);
  b.final_mass = moment(traj.final(), 1.0);
  b.moment_defect = b.initial_mass - b.final_mass;
  b.boundary_outflux = mass_defect(traj);
  b.clamped_mass = traj.step_stats.clamped_mass;
  return b;
}

ExperimentReport check_monotonicity(const Trajectory& traj, double relative_slack) {
  if (traj.empty()) throw ContractError("monotonicity check needs a nonempty trajectory");
  ExperimentReport report("monotonicity");
  const double mass0 = moment(traj.initial(), 1.0);
  const double number0 = moment(traj.initial(), 0.0);
  double mass_rise = 0.0;
  double number_rise = 0.0;
  double negatives = 0.0;
  double prev_mass = mass0;
  double prev_number = number0;
  for (const auto& sample : traj.samples) {
    const double m1 = moment(sample, 1.0);
    const double m0 = moment(sample, 0.0);
    mass_rise = std::max(mass_rise, m1 - prev_mass);
    number_rise = std::max(number_rise, m0 - prev_number);
    prev_mass = m1;
    prev_number = m0;
    for (double x : sample.values()) negatives += x < 0.0 ? 1.0 : 0.0;
  }
  report.check_at_most("mass_increase", mass_rise, relative_slack * mass0);
  report.check_at_most("number_increase", number_rise, relative_slack * number0);
  report.check_at_most("negative_entries", negatives, 0.0);
  report.check_at_most("clamped_mass", traj.step_stats.clamped_mass, 1e-9 * mass0);
  return report;
}

}  // namespace coagkin
