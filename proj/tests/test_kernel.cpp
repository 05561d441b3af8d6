#include <doctest.h>

#include <fstream>

#include "coagkin/errors.hpp"
#include "coagkin/kernel.hpp"
#include "support.hpp"

using namespace coagkin;

TEST_SUITE("kernel") {

TEST_CASE("rule evaluation") {
  CHECK(CoagulationKernel::constant(1.0, {})(5, 9) == 1.0);
  CHECK(CoagulationKernel::additive(1.0, {})(2, 3) == 5.0);
  CHECK(CoagulationKernel::power_sum(1.0, 0.5, {})(4, 9) == 5.0);
  CHECK(CoagulationKernel::product(1.0, {})(2, 3) == 6.0);
}

TEST_CASE("size zero is outside the domain") {
  const auto k = CoagulationKernel::additive(1.0, {});
  CHECK_THROWS_AS(k(0, 3), DomainError);
  CHECK_THROWS_AS(k(3, 0), DomainError);
}

TEST_CASE("evaluation is symmetric on a grid") {
  for (const auto& k : testing::rhs_kernels()) {
    for (std::size_t i = 1; i <= 40; ++i) {
      for (std::size_t j = 1; j <= 40; ++j) CHECK(k(i, j) == k(j, i));
    }
  }
}

TEST_CASE("constructor rejects bad constants") {
  CHECK_THROWS(CoagulationKernel::constant(1.0, {0.0}));
  CHECK_THROWS(CoagulationKernel::constant(-1.0, {}));
  CHECK_THROWS(CoagulationKernel::constant(1.0, {1.0, 1.5}));
  CHECK_THROWS(CoagulationKernel::constant(1.0, {1.0, std::nullopt, -2.0}));
}

TEST_CASE("admissibility of the constant kernel") {
  const auto r = check_admissibility(CoagulationKernel::constant(1.0, {1.0}), 100);
  CHECK(r.passed());
  CHECK(r.metric("violations") == 0.0);
}

TEST_CASE("additive kernel with A too small fails at (1,1)") {
  const auto r = check_admissibility(CoagulationKernel::additive(1.0, {0.5}), 10);
  CHECK_FALSE(r.passed());
  CHECK(r.metric("first_violation_i") == 1.0);
  CHECK(r.metric("first_violation_j") == 1.0);
}

TEST_CASE("product kernel first violates growth at (2,3)") {
  const auto r = check_admissibility(CoagulationKernel::product(1.0, {1.0}), 10);
  CHECK_FALSE(r.passed());
  CHECK(r.metric("first_violation_i") == 2.0);
  CHECK(r.metric("first_violation_j") == 3.0);
}

TEST_CASE("declared delta and zeta are checked") {
  // 1 <= A (i^0 + j^0) = 2A holds for A = 1; zeta = 2 exceeds gamma = 1.
  CHECK(check_admissibility(CoagulationKernel::constant(1.0, {1.0, 0.0, 1.0}), 50).passed());
  CHECK_FALSE(check_admissibility(CoagulationKernel::constant(1.0, {1.0, 0.0, 2.0}), 50).passed());
  // i + j <= A (i^0.5 + j^0.5) fails for large sizes.
  CHECK_FALSE(check_admissibility(CoagulationKernel::additive(1.0, {1.0, 0.5}), 50).passed());
}

TEST_CASE("catalog kernels pass with their declared constants") {
  const auto catalog = kernel_catalog();
  REQUIRE(catalog.size() >= 4);
  bool has_table = false;
  for (const auto& k : catalog) {
    CAPTURE(k.name());
    has_table = has_table || k.type() == KernelType::table;
    CHECK(check_admissibility(k, std::min<std::size_t>(512, k.max_size())).passed());
  }
  CHECK(has_table);
}

TEST_CASE("tabulated kernel is mirrored and bounded") {
  SymmetricTable t(3);
  t.set(2, 1, 4.0);
  t.set(1, 2, 5.0);  // same cell
  const auto k = CoagulationKernel::tabulated(t, {});
  CHECK(k(1, 2) == 5.0);
  CHECK(k(2, 1) == 5.0);
  CHECK(k.max_size() == 3);
  CHECK_THROWS_AS(k(4, 1), DomainError);
}

TEST_CASE("table CSV loading") {
  testing::TempDir dir("coagkin_table");
  const auto path = dir.path() / "k.csv";
  {
    std::ofstream out(path);
    out << "i,j,gamma\n# comment\n1,1,2\n2,1,3\n2,2,4\n";
  }
  const auto t = SymmetricTable::load_csv(path);
  CHECK(t.max_size() == 2);
  CHECK(t.get(1, 2) == 3.0);

  const auto bad = dir.path() / "bad.csv";
  {
    std::ofstream out(bad);
    out << "1,2,3\n";  // i < j
  }
  CHECK_THROWS_AS(SymmetricTable::load_csv(bad), ConfigError);

  const auto gap = dir.path() / "gap.csv";
  {
    std::ofstream out(gap);
    out << "1,1,1\n2,2,1\n";  // (2,1) missing
  }
  CHECK_THROWS_AS(SymmetricTable::load_csv(gap), ConfigError);
}

TEST_CASE("brownian table matches its closed form") {
  const auto t = brownian_table(20);
  const double a = std::cbrt(8.0), b = std::cbrt(27.0);
  CHECK(t.get(8, 1) == doctest::Approx((a + 1.0) * (1.0 / a + 1.0)));
  CHECK(brownian_table(27).get(27, 8) == doctest::Approx((a + b) * (1.0 / a + 1.0 / b)));
}

TEST_CASE("separable kernels expose their factorization") {
  for (const auto& k : testing::rhs_kernels()) {
    if (!k.separable()) continue;
    for (std::size_t i = 1; i <= 10; ++i) {
      for (std::size_t j = 1; j <= 10; ++j) {
        CHECK(k.rate(i, j) ==
              doctest::Approx(k.separable_scale() * (k.size_factor(i) + k.size_factor(j))));
      }
    }
  }
}

}  // TEST_SUITE
