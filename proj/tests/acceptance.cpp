// Acceptance runner: one PASS/FAIL line per criterion. With no arguments all
// criteria run; otherwise only the listed numbers. Exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "coagkin/diagnostics.hpp"
#include "coagkin/experiments.hpp"
#include "coagkin/integrator.hpp"
#include "coagkin/weights.hpp"

using namespace coagkin;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string title;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

SolverConfig solver(double t_end, std::size_t intervals, double rel_tol = 1e-8) {
  SolverConfig c;
  c.rel_tol = rel_tol;
  c.t_end = t_end;
  c.sample_times = SolverConfig::uniform_samples(t_end, intervals);
  return c;
}

std::vector<CoagulationKernel> three_kernels() {
  return {CoagulationKernel::constant(1.0, {1.0, 0.0, 1.0}, "constant"),
          CoagulationKernel::additive(1.0, {1.0, 1.0, 2.0}, "additive"),
          CoagulationKernel::power_sum(1.0, 0.5, {1.0, 0.5, 2.0}, "power")};
}

double max_abs_diff(const SizeDistribution& a, const SizeDistribution& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.truncation(); ++i) {
    d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  }
  return d;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome positivity() {
  Outcome out{true, ""};
  for (const auto& g : three_kernels()) {
    const auto start = std::chrono::steady_clock::now();
    const auto traj = integrate(SizeDistribution::monomer(64), g, solver(10.0, 100));
    const double secs = seconds_since(start);
    const auto r = check_monotonicity(traj);
    const bool ok = r.passed() && secs <= 10.0;
    out.passed = out.passed && ok;
    out.detail += g.name() + ": clamped " + fmt(traj.step_stats.clamped_mass) + ", dM1 " +
                  fmt(r.metric("mass_increase")) + ", " + fmt(secs) + " s; ";
  }
  return out;
}

Outcome oracle() {
  const auto g = CoagulationKernel::constant(1.0, {1.0});
  auto adaptive = solver(1.0, 10);
  auto fixed = adaptive;
  fixed.mode = FixedStepMode{1e-4};
  const auto init = SizeDistribution::monomer(8);
  const auto a = integrate(init, g, adaptive);
  const auto f = integrate(init, g, fixed);
  double worst = 0.0;
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    worst = std::max(worst, max_abs_diff(a.samples[n], f.samples[n]));
  }
  return {worst <= 1e-6, "max component error " + fmt(worst)};
}

Outcome convergence_order() {
  const auto g = CoagulationKernel::constant(1.0, {1.0});
  const auto init = SizeDistribution::monomer(8);
  auto final_state = [&](double h) {
    auto c = solver(1.0, 1);
    c.mode = FixedStepMode{h};
    return integrate(init, g, c).final();
  };
  const double h = 0.025;
  const auto ref = final_state(h / 4);
  const double ratio = max_abs_diff(final_state(h), ref) / max_abs_diff(final_state(h / 2), ref);
  return {ratio >= 14.0 && ratio <= 18.0, "error ratio " + fmt(ratio)};
}

Outcome truncation() {
  const auto r = truncation_convergence(CoagulationKernel::constant(1.0, {1.0}), {}, {}, solver(5.0, 10));
  std::string detail = "defects";
  for (double d : r.defects) detail += " " + fmt(d);
  return {r.report.passed(), detail};
}

Outcome identities() {
  Outcome out{true, ""};
  double adjoint = 0.0, residual = 0.0;
  IdentityOptions o;
  o.phi = {"one", "i", "i2"};
  o.q_list = {8, 16, 31};
  for (const auto& g : three_kernels()) {
    const auto sweep = adjoint_sweep(g, 32, 1000, 11);
    adjoint = std::max(adjoint, sweep.metric("max_adjoint_gap"));
    const auto traj = integrate(SizeDistribution::monomer(32), g, solver(5.0, 2000));
    const auto audit = identity_audit(traj, g, o, 1e-8);
    residual = std::max(residual, audit.metric("max_identity_residual"));
    out.passed = out.passed && sweep.passed() && audit.passed();
  }
  out.detail = "adjoint gap " + fmt(adjoint) + ", identity residual " + fmt(residual);
  return out;
}

Outcome inequality() {
  Outcome out{true, ""};
  std::vector<double> data(1000);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
  std::vector<ConvexWeight> weights{ConvexWeight::power(1.0), ConvexWeight::power(1.5),
                                    ConvexWeight::power(2.0), construct_dlvp(data).weight};
  double violations = 0.0;
  for (const auto& w : weights) {
    const auto r = check_weight_inequality(w, 500);
    violations += r.metric("violations");
    out.passed = out.passed && r.passed();
  }
  const auto sq = ConvexWeight::power(2.0);
  auto sides = [&](double i, double j) {
    const double lhs = (i + j) * (sq.value(i + j) - sq.value(i) - sq.value(j));
    const double rhs = 2.0 * (i * sq.value(j) + j * sq.value(i));
    return lhs == rhs;
  };
  const bool anchors = sides(1, 1) && sides(2, 3);
  out.passed = out.passed && anchors;
  out.detail = "violations " + fmt(violations) + ", equality anchors " + (anchors ? "exact" : "off");
  return out;
}

Outcome moment_propagation() {
  Outcome out{true, ""};
  const std::vector<CoagulationKernel> kernels{CoagulationKernel::constant(1.0, {1.0}),
                                               CoagulationKernel::additive(1.0, {1.0})};
  for (const auto& g : kernels) {
    const auto traj = integrate(SizeDistribution::monomer(32), g, solver(5.0, 50));
    const auto r = check_moment_propagation(traj, ConvexWeight::power(2.0), g);
    out.passed = out.passed && r.passed();
    out.detail += g.name() + " ratio " + fmt(r.metric("max_ratio")) + "; ";
  }
  return out;
}

Outcome dlvp() {
  std::vector<double> data(1000);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
  const double budget = 1.0;
  const auto d = construct_dlvp(data, budget);
  const auto inv = check_weight_invariants(d.weight, 1e3);
  bool increasing = true;
  // Thresholds repeat where the tail drops by more than half between sizes.
  std::vector<std::size_t> distinct(d.tail_thresholds.begin(), d.tail_thresholds.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (std::size_t m = 1; m < distinct.size(); ++m) {
    const double a = static_cast<double>(distinct[m - 1]);
    const double b = static_cast<double>(distinct[m]);
    increasing = increasing && d.weight.value(b) / b > d.weight.value(a) / a;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += d.weight.value(static_cast<double>(i + 1)) * data[i];
  }
  double bound = 0.0;
  for (std::size_t m = 0; m < 64; ++m) bound += (m + 1.0) * std::ldexp(1.0, -static_cast<int>(m));
  bound *= 2.0 * budget;
  return {inv.passed() && increasing && sum <= bound && !d.degenerate,
          "sum G x = " + fmt(sum) + " <= " + fmt(bound) + ", thresholds " +
              std::to_string(d.tail_thresholds.size())};
}

Outcome dependence() {
  PerturbationOptions o;
  o.epsilon = 1e-6;
  o.dependence.t_end = 2.0;
  const auto r = perturbation_study(CoagulationKernel::constant(1.0, {1.0, 0.0}),
                                    SizeDistribution::monomer(32), o, solver(2.0, 20));
  return {r.passed(), "envelope ratio " + fmt(r.metric("eps.max_envelope_ratio")) +
                          ", uniqueness " + fmt(r.metric("identical.uniqueness_max_distance")) +
                          ", linearity " + fmt(r.metric("linear_response_deviation"))};
}

Outcome decay() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = asymptotic_decay(CoagulationKernel::constant(1.0, {1.0, 0.0, 1.0}),
                                  SizeDistribution::monomer(128), {}, solver(100.0, 100));
  const double secs = seconds_since(start);
  return {r.passed() && secs <= 120.0,
          "M0(100) " + fmt(r.metric("M0_final")) + ", envelope ratio " +
              fmt(r.metric("max_envelope_ratio")) + ", max xi_i(100) " +
              fmt(r.metric("component_final_max")) + " (limit 1e-4), last-decile change " +
              fmt(r.metric("component_change_last_decile")) + ", " + fmt(secs) + " s"};
}

Outcome rescaling() {
  const auto r = time_rescaling(CoagulationKernel::constant(1.0, {1.0}),
                                SizeDistribution::monomer(32), {}, solver(2.0, 10));
  return {r.passed(), "max relative gap " + fmt(r.metric("max_relative_gap"))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "positivity and mass monotonicity", 30.0, positivity},
      {2, "oracle equivalence", 5.0, oracle},
      {3, "convergence order", 0.0, convergence_order},
      {4, "truncation convergence", 60.0, truncation},
      {5, "identity audit", 0.0, identities},
      {6, "weight inequality", 0.0, inequality},
      {7, "moment propagation", 0.0, moment_propagation},
      {8, "dlVP construction", 0.0, dlvp},
      {9, "continuous dependence", 0.0, dependence},
      {10, "asymptotic decay", 120.0, decay},
      {11, "time rescaling", 0.0, rescaling},
  };

  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));
  if (selected.empty()) {
    for (const auto& c : criteria) selected.push_back(c.number);
  }

  bool all = true;
  for (int n : selected) {
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    const auto& c = criteria[static_cast<std::size_t>(n - 1)];
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(start);
    if (c.time_limit > 0.0 && secs > c.time_limit) {
      o.passed = false;
      o.detail += " [over time limit " + fmt(c.time_limit) + " s]";
    }
    std::printf("criterion %2d %-34s %s  %s (%.2f s)\n", c.number, c.title.c_str(),
                o.passed ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
