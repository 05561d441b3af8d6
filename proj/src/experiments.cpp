#include "coagkin/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "coagkin/compensated.hpp"
#include "coagkin/diagnostics.hpp"
#include "coagkin/errors.hpp"
#include "coagkin/system.hpp"
#include "coagkin/weights.hpp"

namespace coagkin {

SizeDistribution InitialRule::at(std::size_t k) const {
  switch (kind) {
    case Kind::monomer:
      return SizeDistribution::monomer(k, mass_scale);
    case Kind::geometric:
      return SizeDistribution::geometric(k, ratio, mass_scale);
    case Kind::file: {
      std::vector<double> values(k, 0.0);
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (i < k) {
          values[i] = mass_scale * data[i];
        } else if (data[i] != 0.0) {
          throw ContractError("initial data has mass beyond truncation k=" + std::to_string(k));
        }
      }
      return SizeDistribution(std::move(values));
    }
  }
  throw ContractError("unknown initial rule");
}

std::string InitialRule::describe() const {
  switch (kind) {
    case Kind::monomer:
      return "monomer";
    case Kind::geometric:
      return "geometric(" + std::to_string(ratio) + ")";
    case Kind::file:
      return "file(" + std::to_string(data.size()) + " sizes)";
  }
  return "unknown";
}

std::vector<double> sample_grid(double t_end, std::size_t intervals,
                                const std::vector<double>& extra) {
  auto grid = SolverConfig::uniform_samples(t_end, intervals);
  for (double t : extra) {
    if (t > 0.0 && t < t_end) grid.push_back(t);
  }
  std::sort(grid.begin(), grid.end());
  const double eps = 1e-12 * t_end;
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [eps](double a, double b) { return std::abs(a - b) <= eps; }),
             grid.end());
  grid.back() = t_end;
  return grid;
}

namespace {

SolverConfig over(const SolverConfig& base, double t_end, std::vector<double> samples) {
  SolverConfig c = base;
  c.t_end = t_end;
  c.sample_times = std::move(samples);
  return c;
}

std::string key(const std::string& stem, std::size_t k) { return stem + "_k" + std::to_string(k); }

double weighted_distance(std::span<const double> a, std::span<const double> b, std::size_t upto) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < upto; ++i) {
    sum += static_cast<double>(i + 1) * std::abs(a[i] - b[i]);
  }
  return sum.value();
}

}  // namespace

TruncationResult truncation_convergence(const CoagulationKernel& kernel, const InitialRule& init,
                                        const TruncationOptions& options,
                                        const SolverConfig& solver) {
  const auto& ks = options.k_list;
  if (ks.size() < 3) throw ContractError("truncation study needs at least 3 entries in k_list");
  for (std::size_t n = 0; n < ks.size(); ++n) {
    if (ks[n] < 2) throw ContractError("every k in k_list must be >= 2");
    if (n > 0 && ks[n] <= ks[n - 1]) throw ContractError("k_list must be strictly ascending");
  }

  TruncationResult result{ExperimentReport("truncation"), ks, {}, {}};
  auto& report = result.report;
  const SolverConfig config =
      over(solver, options.t_end, SolverConfig::uniform_samples(options.t_end, options.sample_intervals));

  const auto runs = static_cast<std::ptrdiff_t>(ks.size());
  std::vector<Trajectory> trajectories(ks.size());
  std::vector<std::string> failures(ks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t n = 0; n < runs; ++n) {
    try {
      trajectories[n] = integrate(init.at(ks[n]), kernel, config);
    } catch (const std::exception& e) {
      failures[n] = e.what();
    }
  }
  bool failed = false;
  for (std::size_t n = 0; n < ks.size(); ++n) {
    if (!failures[n].empty()) {
      report.record_error("integration failed at k=" + std::to_string(ks[n]) + ": " + failures[n]);
      failed = true;
    }
  }
  if (failed) return result;

  const double mass0 = moment(trajectories.front().initial(), 1.0);
  report.set_metric("M1_0", mass0);
  report.set_metric("T", options.t_end);

  double defect_violations = 0.0;
  for (std::size_t n = 0; n < ks.size(); ++n) {
    const double d = mass_defect(trajectories[n]);
    result.defects.push_back(d);
    report.set_metric(key("defect", ks[n]), d);
    report.set_metric(key("moment_defect", ks[n]), mass_balance(trajectories[n]).moment_defect);
    if (n > 0) {
      const double prev = result.defects[n - 1];
      const bool rises = d > prev;
      const bool stalls = options.strict_decrease && d == prev && prev > 0.0;
      if (rises || stalls) {
        defect_violations += 1.0;
        report.add_note("defect does not decrease from k=" + std::to_string(ks[n - 1]) +
                        " to k=" + std::to_string(ks[n]));
      }
    }
  }
  report.check_at_most("defect_order_violations", defect_violations, 0.0);

  const double floor = options.distance_noise * config.rel_tol * mass0;
  report.set_metric("distance_noise_floor", floor);
  double distance_violations = 0.0;
  for (std::size_t n = 0; n + 1 < ks.size(); ++n) {
    const double d = weighted_distance(trajectories[n].final().values(),
                                       trajectories[n + 1].final().values(), ks[n]);
    result.distances.push_back(d);
    report.set_metric(key("distance", ks[n]), d);
    if (n > 0 && d > result.distances[n - 1] && d > floor) distance_violations += 1.0;
  }
  report.check_at_most("distance_order_violations", distance_violations, 0.0);
  report.check_at_most("defect_at_max_k", result.defects.back(), options.defect_threshold * mass0);
  return result;
}

ExperimentReport continuous_dependence(const CoagulationKernel& kernel,
                                       const SizeDistribution& init_a,
                                       const SizeDistribution& init_b,
                                       const DependenceOptions& options,
                                       const SolverConfig& solver) {
  const auto& c = kernel.constants();
  if (!c.power_delta) throw ContractError("continuous dependence needs a kernel with delta");
  if (init_a.truncation() != init_b.truncation()) {
    throw ContractError("both initial states must share the truncation k");
  }
  ExperimentReport report("dependence");
  const SolverConfig config = over(solver, options.t_end,
                                   SolverConfig::uniform_samples(options.t_end, options.sample_intervals));
  const Trajectory a = integrate(init_a, kernel, config);
  const Trajectory b = integrate(init_b, kernel, config);

  const double order = 1.0 + *c.power_delta;
  double moment_sup = 0.0;
  for (const auto* traj : {&a, &b}) {
    for (const auto& s : traj->samples) moment_sup = std::max(moment_sup, moment(s, order));
  }
  const double mass0 = std::max(moment(init_a, 1.0), moment(init_b, 1.0));
  const double rate = 4.0 * c.growth_A * (moment_sup + mass0);
  report.set_metric("moment_sup", moment_sup);
  report.set_metric("C_cd", rate);

  const std::size_t k = init_a.truncation();
  const double d0 = weighted_distance(init_a.values(), init_b.values(), k);
  double max_distance = 0.0;
  double max_ratio = 0.0;
  double amplification = 0.0;
  double final_distance = 0.0;
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    const double d = weighted_distance(a.samples[n].values(), b.samples[n].values(), k);
    max_distance = std::max(max_distance, d);
    final_distance = d;
    if (d0 > 0.0) {
      max_ratio = std::max(max_ratio, d / (d0 * std::exp(rate * a.samples[n].time())));
      amplification = std::max(amplification, d / d0);
    }
  }
  report.set_metric("D_0", d0);
  report.set_metric("D_final", final_distance);
  report.set_metric("max_distance", max_distance);
  if (d0 == 0.0) {
    report.check_at_most("uniqueness_max_distance", max_distance, options.uniqueness_tolerance);
  } else {
    report.set_metric("observed_amplification", amplification);
    report.check_at_most("max_envelope_ratio", max_ratio, options.envelope_limit);
  }
  return report;
}

ExperimentReport perturbation_study(const CoagulationKernel& kernel, const SizeDistribution& base,
                                    const PerturbationOptions& options,
                                    const SolverConfig& solver) {
  if (options.perturbed_size < 1 || options.perturbed_size > base.truncation()) {
    throw ContractError("perturbed_size must lie in 1..k");
  }
  if (!(options.epsilon > 0.0)) throw ContractError("epsilon must be > 0");
  auto perturbed = [&](double eps) {
    std::vector<double> v(base.values().begin(), base.values().end());
    v[options.perturbed_size - 1] += eps;
    return SizeDistribution(std::move(v));
  };

  ExperimentReport report("dependence");
  const auto same = continuous_dependence(kernel, base, base, options.dependence, solver);
  const auto full =
      continuous_dependence(kernel, base, perturbed(options.epsilon), options.dependence, solver);
  const auto half =
      continuous_dependence(kernel, base, perturbed(0.5 * options.epsilon), options.dependence, solver);
  report.merge(same, "identical");
  report.merge(full, "eps");
  report.merge(half, "half_eps");

  const double ratio = half.metric("D_final") / full.metric("D_final");
  report.set_metric("final_distance_ratio", ratio);
  report.check_at_most("linear_response_deviation", std::abs(ratio / 0.5 - 1.0),
                       options.linearity_tolerance);
  return report;
}

ExperimentReport asymptotic_decay(const CoagulationKernel& kernel, const SizeDistribution& init,
                                  const DecayOptions& options, const SolverConfig& solver) {
  const auto zeta = kernel.constants().lower_bound_zeta;
  if (!zeta) throw ContractError("asymptotic decay needs a kernel with zeta");
  ExperimentReport report("decay");
  const double t_check = 0.9 * options.t_end;
  const SolverConfig config =
      over(solver, options.t_end, sample_grid(options.t_end, options.sample_intervals, {t_check}));
  const Trajectory traj = integrate(init, kernel, config);

  const double number0 = moment(init, 0.0);
  double rise = 0.0;
  double max_ratio = 0.0;
  double prev = number0;
  const SizeDistribution* at_check = nullptr;
  for (const auto& s : traj.samples) {
    const double m0 = moment(s, 0.0);
    rise = std::max(rise, m0 - prev);
    prev = m0;
    const double envelope = number0 / (1.0 + 0.5 * *zeta * number0 * s.time());
    if (envelope > 0.0) {
      max_ratio = std::max(max_ratio, m0 / envelope);
    } else if (m0 > 0.0) {
      max_ratio = std::numeric_limits<double>::infinity();
    }
    if (std::abs(s.time() - t_check) <= 1e-12 * options.t_end) at_check = &s;
  }
  if (at_check == nullptr) throw ContractError("sample grid lacks 0.9 T");

  const auto& last = traj.final();
  const std::size_t count = std::min(options.components, last.truncation());
  double conv = 0.0;
  double limit = 0.0;
  for (std::size_t i = 1; i <= count; ++i) {
    conv = std::max(conv, std::abs(last.concentration(i) - at_check->concentration(i)));
    limit = std::max(limit, std::abs(last.concentration(i)));
    report.set_metric("xi_" + std::to_string(i) + "_final", last.concentration(i));
  }

  report.set_metric("zeta", *zeta);
  report.set_metric("M0_0", number0);
  report.set_metric("M0_final", moment(last, 0.0));
  report.set_metric("M1_final", moment(last, 1.0));
  report.set_metric("envelope_final", number0 / (1.0 + 0.5 * *zeta * number0 * options.t_end));
  report.check_at_most("number_increase", rise, options.number_slack * number0);
  report.check_at_most("max_envelope_ratio", max_ratio, 1.0 + options.envelope_slack);
  report.check_at_most("component_change_last_decile", conv, options.tol_conv);
  report.check_at_most("component_final_max", limit, options.tol_limit);
  return report;
}

std::vector<std::string> phi_names() { return {"zero", "one", "i", "i2", "alternating"}; }

TestSequence phi_sequence(const std::string& name, std::size_t length) {
  if (name == "zero") return TestSequence::constant(length, 0.0);
  if (name == "one") return TestSequence::constant(length, 1.0);
  if (name == "i") return TestSequence::power(length, 1.0);
  if (name == "i2") return TestSequence::power(length, 2.0);
  if (name == "alternating") {
    return TestSequence::from_rule(length, [](std::size_t i) { return i % 2 == 0 ? 1.0 : -1.0; });
  }
  throw ContractError("unknown test sequence '" + name + "'");
}

namespace {

double partial_sum(const TestSequence& phi, const SizeDistribution& s, std::size_t q) {
  CompensatedSum sum;
  for (std::size_t i = 1; i <= q; ++i) sum += phi.at_size(i) * s.concentration(i);
  return sum.value();
}

/// Simpson on a possibly nonuniform pair of intervals [t0, t1], [t1, t2].
double simpson_pair(double t0, double t1, double t2, double f0, double f1, double f2) {
  const double h0 = t1 - t0;
  const double h1 = t2 - t1;
  return (h0 + h1) / 6.0 *
         ((2.0 - h1 / h0) * f0 + (h0 + h1) * (h0 + h1) / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2);
}

double adjoint_gap(const TestSequence& psi, const SizeDistribution& s,
                   const CoagulationKernel& kernel, double& scale) {
  const double weak = weak_form_rate(psi, s, kernel);
  const auto derivative = rhs(s, kernel);
  CompensatedSum direct;
  for (std::size_t i = 0; i < derivative.size(); ++i) direct += psi.values[i] * derivative[i];
  scale = weak_form_magnitude(psi, s, kernel);
  return std::abs(weak - direct.value());
}

double relative(double gap, double scale) {
  if (gap == 0.0) return 0.0;
  return scale > 0.0 ? gap / scale : std::numeric_limits<double>::infinity();
}

}  // namespace

ExperimentReport identity_audit(const Trajectory& traj, const CoagulationKernel& kernel,
                                const IdentityOptions& options, double rel_tol) {
  if (traj.empty()) throw ContractError("identity audit needs a nonempty trajectory");
  ExperimentReport report("identity");
  const std::size_t k = traj.initial().truncation();
  std::vector<std::size_t> qs = options.q_list;
  if (qs.empty()) qs = {std::max<std::size_t>(1, k / 4), std::max<std::size_t>(1, k / 2), k - 1, k};
  for (std::size_t q : qs) {
    if (q < 1 || q > k) throw ContractError("q must lie in 1..k, got " + std::to_string(q));
  }
  const std::size_t n = traj.samples.size();
  const double limit = options.residual_factor * rel_tol;

  double worst_residual = 0.0;
  double worst_adjoint = 0.0;
  for (const auto& name : options.phi) {
    const TestSequence phi = phi_sequence(name, k);
    for (const auto& s : traj.samples) {
      double scale = 0.0;
      const double gap = adjoint_gap(phi, s, kernel, scale);
      worst_adjoint = std::max(worst_adjoint, relative(gap, scale));
    }
    for (std::size_t q : qs) {
      std::vector<double> rate(n), magnitude(n);
      for (std::size_t m = 0; m < n; ++m) {
        rate[m] = q == k ? weak_form_rate(phi, traj.samples[m], kernel)
                         : finite_identity_rate(phi, traj.samples[m], kernel, q);
        magnitude[m] = std::abs(rate[m]);
      }
      const double start = partial_sum(phi, traj.initial(), q);
      const TestSequence phi_abs =
          TestSequence::from_rule(k, [&](std::size_t i) { return std::abs(phi.at_size(i)); });
      double integral = 0.0;
      double variation = 0.0;
      double level = partial_sum(phi_abs, traj.initial(), q);
      double residual = 0.0;
      for (std::size_t m = 2; m < n; m += 2) {
        const double t0 = traj.samples[m - 2].time();
        const double t1 = traj.samples[m - 1].time();
        const double t2 = traj.samples[m].time();
        integral += simpson_pair(t0, t1, t2, rate[m - 2], rate[m - 1], rate[m]);
        variation += 0.5 * (t1 - t0) * (magnitude[m - 2] + magnitude[m - 1]) +
                     0.5 * (t2 - t1) * (magnitude[m - 1] + magnitude[m]);
        level = std::max({level, partial_sum(phi_abs, traj.samples[m - 1], q),
                          partial_sum(phi_abs, traj.samples[m], q)});
        // The state itself is only accurate relative to its size, so the scale
        // is the integrated |rate| plus the largest |phi|-weighted partial sum.
        const double change = partial_sum(phi, traj.samples[m], q) - start;
        residual = std::max(residual, relative(std::abs(change - integral), variation + level));
      }
      report.set_metric("residual_" + name + "_q" + std::to_string(q), residual);
      worst_residual = std::max(worst_residual, residual);
      if (name == "i" && q == k && n % 2 == 1 && !traj.boundary_loss.empty()) {
        const double mass0 = moment(traj.initial(), 1.0);
        const double leak = traj.boundary_loss.back();
        const double gap = std::abs(integral + leak);
        report.set_metric("integrated_mass_rate", integral);
        report.check_at_most("mass_flux_mismatch", mass0 > 0.0 ? gap / mass0 : gap, limit);
      }
    }
  }
  if (n % 2 == 0) report.add_note("odd number of sample intervals; final sample not audited");
  report.check_at_most("max_identity_residual", worst_residual, limit);
  report.check_at_most("max_adjoint_gap", worst_adjoint, options.adjoint_tolerance);
  if (options.random_states > 0) {
    report.merge(adjoint_sweep(kernel, k, options.random_states, options.seed,
                               options.adjoint_tolerance),
                 "random");
  }
  return report;
}

ExperimentReport adjoint_sweep(const CoagulationKernel& kernel, std::size_t k, std::size_t count,
                               std::uint64_t seed, double tolerance) {
  if (k < 2) throw ContractError("adjoint sweep needs k >= 2");
  ExperimentReport report("adjoint_sweep");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto names = phi_names();
  double worst = 0.0;
  double dissipation_violations = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<double> xi(k);
    const double decay = 4.0 * unit(rng);
    for (std::size_t i = 0; i < k; ++i) {
      xi[i] = unit(rng) < 0.2 ? 0.0 : unit(rng) * std::exp(-decay * static_cast<double>(i) / k);
    }
    const SizeDistribution s(std::move(xi));
    const TestSequence psi =
        n % 2 == 0 ? phi_sequence(names[(n / 2) % names.size()], k)
                   : TestSequence::from_rule(k, [&](std::size_t) { return normal(rng); });
    double scale = 0.0;
    const double gap = adjoint_gap(psi, s, kernel, scale);
    worst = std::max(worst, relative(gap, scale));
    const TestSequence mass = TestSequence::power(k, 1.0);
    if (weak_form_rate(mass, s, kernel) > 0.0) dissipation_violations += 1.0;
  }
  report.set_metric("states", static_cast<double>(count));
  report.check_at_most("max_adjoint_gap", worst, tolerance);
  report.check_at_most("mass_rate_positive", dissipation_violations, 0.0);
  return report;
}

ExperimentReport time_rescaling(const CoagulationKernel& kernel, const SizeDistribution& init,
                                const RescalingOptions& options, const SolverConfig& solver) {
  if (kernel.type() != KernelType::constant) {
    throw ContractError("time rescaling holds only for the constant kernel");
  }
  ExperimentReport report("rescaling");
  const auto grid = SolverConfig::uniform_samples(options.t_end, options.sample_intervals);
  double worst = 0.0;
  for (double alpha : options.alphas) {
    if (!(alpha > 0.0)) throw ContractError("rescaling factors must be > 0");
    std::vector<double> stretched(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) stretched[n] = alpha * grid[n];
    stretched.back() = alpha * options.t_end;
    const Trajectory scaled = integrate(init.scaled(alpha), kernel, over(solver, options.t_end, grid));
    const Trajectory base =
        integrate(init, kernel, over(solver, alpha * options.t_end, std::move(stretched)));
    double gap = 0.0;
    double size = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const auto a = scaled.samples[n].values();
      const auto b = base.samples[n].values();
      for (std::size_t i = 0; i < a.size(); ++i) {
        gap = std::max(gap, std::abs(a[i] - alpha * b[i]));
        size = std::max(size, std::abs(a[i]));
      }
    }
    const double err = relative(gap, size);
    report.set_metric("relative_gap_alpha_" + std::to_string(alpha), err);
    worst = std::max(worst, err);
  }
  report.check_at_most("max_relative_gap", worst, options.tolerance_factor * solver.rel_tol);
  return report;
}

ExperimentReport weights_study(std::span<const double> data, const WeightsOptions& options) {
  ExperimentReport report("weights");
  for (double p : options.powers) {
    const auto w = ConvexWeight::power(p);
    report.merge(check_weight_invariants(w, options.sample_extent, 2000, options.seed),
                 w.label());
    report.merge(check_weight_inequality(w, options.inequality_size), w.label());
  }
  const DlvpWeight dlvp = construct_dlvp(data, options.tail_budget);
  if (dlvp.degenerate) {
    report.add_note("zero-mass data: dlVP construction returned the identity weight");
    return report;
  }
  const double extent = std::max(options.sample_extent, dlvp.weight.knots().back());
  report.merge(check_weight_invariants(dlvp.weight, extent, 2000, options.seed), "dlvp");
  report.merge(check_weight_inequality(dlvp.weight, options.inequality_size), "dlvp");

  CompensatedSum brute;
  for (std::size_t i = 0; i < data.size(); ++i) {
    brute += dlvp.weight.value(static_cast<double>(i + 1)) * data[i];
  }
  // sum_m (m+1) 2^-m = 4
  const double series_bound = 2.0 * options.tail_budget * 4.0;
  report.set_metric("dlvp.knots", static_cast<double>(dlvp.weight.knots().size()));
  report.set_metric("dlvp.certified_bound", dlvp.certified_bound);
  report.check_at_most("dlvp.g_moment", brute.value(), series_bound);
  report.check_at_most("dlvp.g_moment_over_certified", brute.value() / dlvp.certified_bound,
                       1.0 + 1e-12);
  return report;
}

}  // namespace coagkin
