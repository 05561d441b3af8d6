#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <random>

#include "coagkin/diagnostics.hpp"
#include "coagkin/errors.hpp"
#include "coagkin/integrator.hpp"
#include "coagkin/system.hpp"
#include "support.hpp"

using namespace coagkin;

namespace {

const auto unit_kernel = CoagulationKernel::constant(1.0, {1.0});

SolverConfig config(double t_end, std::size_t intervals) {
  SolverConfig c;
  c.t_end = t_end;
  c.sample_times = SolverConfig::uniform_samples(t_end, intervals);
  return c;
}

double max_abs_diff(const SizeDistribution& a, const SizeDistribution& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.truncation(); ++i) {
    d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  }
  return d;
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("config validation") {
  SolverConfig c = config(1.0, 4);
  CHECK_NOTHROW(c.validate());
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = config(1.0, 4);
  c.sample_times = {0.0, 0.5, 0.5, 1.0};
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.sample_times = {0.1, 1.0};
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = config(1.0, 4);
  c.mode = FixedStepMode{0.0};
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("single step from the zero state") {
  const auto r = step(SizeDistribution::zeros(5), unit_kernel, 0.3, config(1.0, 1));
  CHECK(r.accepted);
  for (double x : r.new_state.values()) CHECK(x == 0.0);
}

TEST_CASE("single small step follows the Taylor expansion") {
  const double h = 1e-6;
  const auto r = step(SizeDistribution({1, 0, 0}), unit_kernel, h, config(1.0, 1));
  REQUIRE(r.accepted);
  CHECK(std::abs(r.new_state.concentration(1) - (1.0 - 2.0 * h)) <= 4.0 * h * h);
  CHECK(std::abs(r.new_state.concentration(2) - h) <= 4.0 * h * h);
  CHECK(r.new_state.time() == h);
}

TEST_CASE("a huge step that overshoots below the guard is rejected") {
  SolverConfig c = config(100.0, 1);
  c.rel_tol = 1e12;  // accept any error so that only the positivity guard can reject
  c.abs_tol = 1e12;
  const auto r = step(SizeDistribution({10, 0, 0, 0}), unit_kernel, 5.0, c);
  CHECK_FALSE(r.accepted);
  CHECK(r.new_state.concentration(1) == 10.0);
}

TEST_CASE("step size above max_step is a contract error") {
  SolverConfig c = config(1.0, 1);
  c.max_step = 0.1;
  CHECK_THROWS_AS(step(SizeDistribution::monomer(4), unit_kernel, 0.2, c), ContractError);
}

TEST_CASE("zero initial data stays zero") {
  const auto traj = integrate(SizeDistribution::zeros(16), unit_kernel, config(10.0, 10));
  REQUIRE(traj.samples.size() == 11);
  for (const auto& s : traj.samples) {
    for (double x : s.values()) CHECK(x == 0.0);
  }
}

TEST_CASE("samples land on the requested times") {
  SolverConfig c = config(2.0, 1);
  c.sample_times = {0.0, 0.1, 0.25, 1.7, 2.0};
  for (bool fixed : {false, true}) {
    if (fixed) c.mode = FixedStepMode{0.03};
    const auto traj = integrate(SizeDistribution::monomer(8), unit_kernel, c);
    REQUIRE(traj.samples.size() == c.sample_times.size());
    for (std::size_t n = 0; n < c.sample_times.size(); ++n) {
      CHECK(traj.samples[n].time() == c.sample_times[n]);
    }
  }
}

TEST_CASE("adaptive run agrees with the fixed-step oracle") {
  SolverConfig adaptive = config(1.0, 10);
  SolverConfig fixed = adaptive;
  fixed.mode = FixedStepMode{1e-4};
  const auto init = SizeDistribution::monomer(8);
  const auto a = integrate(init, unit_kernel, adaptive);
  const auto f = integrate(init, unit_kernel, fixed);
  double worst = 0.0;
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    worst = std::max(worst, max_abs_diff(a.samples[n], f.samples[n]));
  }
  CHECK(worst <= 1e-6);
  CHECK(f.step_stats.rejected() == 0);
}

TEST_CASE("dense output is accurate between steps") {
  // Coarse samples force interpolation; compare with a run that steps onto each sample.
  SolverConfig c = config(3.0, 30);
  SolverConfig oracle = c;
  oracle.mode = FixedStepMode{1e-3};
  const auto a = integrate(SizeDistribution::monomer(12), unit_kernel, c);
  const auto o = integrate(SizeDistribution::monomer(12), unit_kernel, oracle);
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    CHECK(max_abs_diff(a.samples[n], o.samples[n]) <= 1e-7);
  }
}

TEST_CASE("particle number strictly decreases") {
  const auto traj = integrate(SizeDistribution::monomer(64), unit_kernel, config(10.0, 10));
  CHECK(moment(traj.final(), 0.0) < moment(traj.initial(), 0.0));
}

TEST_CASE("positivity and mass monotonicity on random data") {
  std::mt19937_64 rng(101);
  for (const auto& g : kernel_catalog()) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto init = testing::random_state(rng, 24);
      const auto traj = integrate(init, g, config(2.0, 20));
      CAPTURE(g.name());
      const auto r = check_monotonicity(traj);
      CHECK(r.passed());
      CHECK(traj.step_stats.clamped_mass <= 1e-9 * moment(init, 1.0));
    }
  }
}

TEST_CASE("boundary flux component matches the moment change") {
  const auto traj = integrate(SizeDistribution::monomer(10), unit_kernel, config(5.0, 5));
  const auto b = mass_balance(traj);
  CHECK(b.boundary_outflux > 0.0);
  CHECK(b.boundary_outflux == doctest::Approx(b.moment_defect).epsilon(1e-6));
}

TEST_CASE("fourth-order convergence of the fixed-step mode") {
  const auto init = SizeDistribution::monomer(8);
  auto final_state = [&](double h) {
    SolverConfig c = config(1.0, 1);
    c.mode = FixedStepMode{h};
    return integrate(init, unit_kernel, c).final();
  };
  const double h = 0.025;
  const auto coarse = final_state(h);
  const auto fine = final_state(h / 2);
  const auto ref = final_state(h / 4);
  const double ratio = max_abs_diff(coarse, ref) / max_abs_diff(fine, ref);
  CHECK(ratio >= 14.0);
  CHECK(ratio <= 18.0);
}

TEST_CASE("impossible tolerances stall with the last good state") {
  SolverConfig c = config(1.0, 1);
  c.rel_tol = 1e-300;
  c.abs_tol = 1e-300;
  try {
    integrate(SizeDistribution::monomer(6), unit_kernel, c);
    FAIL("expected a stall");
  } catch (const IntegrationStalled& e) {
    CHECK(e.last_good_state().truncation() == 6);
  }
}

TEST_CASE("cancellation returns the partial trajectory") {
  std::atomic<bool> stop{true};
  try {
    integrate(SizeDistribution::monomer(6), unit_kernel, config(1.0, 4), &stop);
    FAIL("expected an interruption");
  } catch (const IntegrationInterrupted& e) {
    CHECK(e.partial().samples.size() <= 1);
  }
}

TEST_CASE("tabulated kernel beyond its extent is refused") {
  const auto g = CoagulationKernel::tabulated(brownian_table(16), {2.0});
  CHECK_THROWS_AS(integrate(SizeDistribution::monomer(17), g, config(1.0, 1)), DomainError);
}

TEST_CASE("criterion-scale runs finish quickly") {
  for (const auto& g : {kernel_catalog()[0], kernel_catalog()[1], kernel_catalog()[2]}) {
    const auto start = std::chrono::steady_clock::now();
    const auto traj = integrate(SizeDistribution::monomer(64), g, config(10.0, 100));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CAPTURE(g.name());
    CHECK(secs < 10.0);
    CHECK(check_monotonicity(traj).passed());
  }
}

}  // TEST_SUITE
