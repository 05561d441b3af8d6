#include <doctest.h>

#include <cmath>
#include <random>

#include "coagkin/errors.hpp"
#include "coagkin/weights.hpp"

using namespace coagkin;

namespace {

std::vector<double> geometric(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 1; i <= n; ++i) x[i - 1] = std::ldexp(1.0, -static_cast<int>(i));
  return x;
}

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("power weights evaluate exactly") {
  CHECK(ConvexWeight::power(2.0).value(3.0) == 9.0);
  CHECK(ConvexWeight::power(1.0).value(7.25) == 7.25);
  CHECK(ConvexWeight::power(1.5).value(4.0) == doctest::Approx(8.0));
  CHECK(ConvexWeight::power(2.0).derivative(3.0) == 6.0);
  for (double p : {1.0, 1.5, 2.0}) CHECK(ConvexWeight::power(p).value(0.0) == 0.0);
  CHECK(ConvexWeight::power(1.0).class_tag() == WeightClass::G1);
  CHECK(ConvexWeight::power(1.5).class_tag() == WeightClass::G1_infinity);
}

TEST_CASE("weights reject negative arguments and bad exponents") {
  CHECK_THROWS_AS(ConvexWeight::power(2.0).value(-1.0), DomainError);
  CHECK_THROWS_AS(ConvexWeight::power(2.0).derivative(-1.0), DomainError);
  CHECK_THROWS(ConvexWeight::power(2.5));
  CHECK_THROWS(ConvexWeight::power(0.5));
}

TEST_CASE("piecewise weight integrates its derivative") {
  // G' = x on [0,2], then slope 1/2 up to 6.
  const auto w = ConvexWeight::piecewise({0, 2, 6}, {0, 2, 4}, WeightClass::G1_infinity);
  CHECK(w.value(0.0) == 0.0);
  CHECK(w.value(2.0) == doctest::Approx(2.0));
  CHECK(w.value(6.0) == doctest::Approx(2.0 + 4.0 * 3.0));
  CHECK(w.derivative(4.0) == doctest::Approx(3.0));
  // past the last knot G' keeps its last slope
  CHECK(w.derivative(8.0) == doctest::Approx(5.0));
  CHECK(w.value(8.0) == doctest::Approx(14.0 + 9.0));
}

TEST_CASE("piecewise validation") {
  CHECK_THROWS(ConvexWeight::piecewise({0, 1}, {0}, WeightClass::G1));
  CHECK_THROWS(ConvexWeight::piecewise({1, 2}, {0, 1}, WeightClass::G1));
  CHECK_THROWS(ConvexWeight::piecewise({0, 1, 1}, {0, 1, 2}, WeightClass::G1));
  CHECK_THROWS(ConvexWeight::piecewise({0, 1, 2}, {0, 2, 1}, WeightClass::G1));
  CHECK_THROWS(ConvexWeight::piecewise({0, 1, 2}, {0, 1, 3}, WeightClass::G1));  // convex G'
  CHECK_THROWS(ConvexWeight::piecewise({0, 1}, {1, 1}, WeightClass::G1_infinity));
}

TEST_CASE("json round trip") {
  const auto w = ConvexWeight::piecewise({0, 2, 6}, {0, 2, 4}, WeightClass::G1_infinity);
  const auto back = ConvexWeight::from_json(w.to_json());
  CHECK(back.knots() == w.knots());
  CHECK(back.derivative_values() == w.derivative_values());
  CHECK(back.value(5.0) == w.value(5.0));
  CHECK(ConvexWeight::from_json(ConvexWeight::power(1.5).to_json()).value(9.0) ==
        ConvexWeight::power(1.5).value(9.0));
}

TEST_CASE("pair inequality anchors") {
  const auto lin = check_weight_inequality(ConvexWeight::power(1.0), 50);
  CHECK(lin.passed());
  // x^2 saturates the inequality: (1,1) gives 4 = 4 and (2,3) gives 60 = 60.
  const auto sq = ConvexWeight::power(2.0);
  auto lhs = [&](double i, double j) { return (i + j) * (sq.value(i + j) - sq.value(i) - sq.value(j)); };
  auto rhs = [&](double i, double j) { return 2.0 * (i * sq.value(j) + j * sq.value(i)); };
  CHECK(lhs(1, 1) == 4.0);
  CHECK(rhs(1, 1) == 4.0);
  CHECK(lhs(2, 3) == 60.0);
  CHECK(rhs(2, 3) == 60.0);
  const auto r = check_weight_inequality(sq, 200);
  CHECK(r.passed());
  CHECK(r.metric("max_lhs_over_rhs") == doctest::Approx(1.0));
}

TEST_CASE("power weights satisfy the class invariants") {
  for (double p : {1.0, 1.5, 2.0}) {
    CAPTURE(p);
    CHECK(check_weight_invariants(ConvexWeight::power(p), 1e3).passed());
  }
}

TEST_CASE("dlVP weight for finite support") {
  const std::vector<double> data{0.5, 0.25, 0.0, 0.1};
  const auto d = construct_dlvp(data);
  CHECK_FALSE(d.degenerate);
  CHECK(d.weight.class_tag() == WeightClass::G1_infinity);
  double sum = 0.0;
  for (std::size_t i = 1; i <= data.size(); ++i) sum += d.weight.value(double(i)) * data[i - 1];
  CHECK(std::isfinite(sum));
  CHECK(sum <= d.certified_bound * (1 + 1e-12));
  CHECK(check_weight_invariants(d.weight, 100.0).passed());
}

TEST_CASE("dlVP weight for geometric data") {
  const auto data = geometric(1000);
  const auto d = construct_dlvp(data, 1.0);
  const auto& n = d.tail_thresholds;
  REQUIRE(n.size() >= 3);
  CHECK(n.front() == 1);
  // thresholds: smallest n with tail <= 2^-m, brute force from the closed form (n+1) 2^(1-n)
  for (std::size_t m = 1; m < n.size() && m < 30; ++m) {
    std::size_t expect = 1;
    while ((expect + 1) * std::ldexp(1.0, 1 - static_cast<int>(expect)) > std::ldexp(1.0, -static_cast<int>(m))) ++expect;
    CHECK(n[m] == expect);
  }
  double sum = 0.0;
  for (std::size_t i = 1; i <= data.size(); ++i) sum += d.weight.value(double(i)) * data[i - 1];
  CHECK(sum <= 2.0 * 1.0 * 4.0);
  CHECK(sum <= d.certified_bound * (1 + 1e-12));
  const auto& knots = d.weight.knots();
  for (std::size_t m = 2; m < knots.size(); ++m) {
    CHECK(d.weight.value(knots[m]) / knots[m] > d.weight.value(knots[m - 1]) / knots[m - 1]);
  }
  CHECK(d.weight.value(knots.back()) / knots.back() > 10.0);
  CHECK(check_weight_invariants(d.weight, 2000.0).passed());
  CHECK(check_weight_inequality(d.weight, 300).passed());
}

TEST_CASE("dlVP knot gaps are nondecreasing") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> data(200);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = unit(rng) / double((i + 1) * (i + 1) * (i + 1));
    const auto d = construct_dlvp(data, 0.5 + unit(rng));
    const auto& knots = d.weight.knots();
    for (std::size_t m = 2; m < knots.size(); ++m) {
      CHECK(knots[m] - knots[m - 1] >= knots[m - 1] - knots[m - 2]);
    }
    for (std::size_t m = 1; m < d.tail_thresholds.size(); ++m) {
      CHECK(knots[m] >= double(d.tail_thresholds[m]));
    }
  }
}

TEST_CASE("dlVP of zero data is the identity weight") {
  const std::vector<double> zero(10, 0.0);
  const auto d = construct_dlvp(zero);
  CHECK(d.degenerate);
  CHECK(d.weight.class_tag() == WeightClass::G1);
  CHECK(d.weight.value(3.0) == 3.0);
  CHECK_THROWS_AS(construct_dlvp(zero, 0.0), DomainError);
}

}  // TEST_SUITE
