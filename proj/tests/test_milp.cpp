#include <doctest.h>

#include <cmath>

#include "cutstop/milp.hpp"
#include "test_util.hpp"

using namespace cutstop;
using namespace cutstop::testing;

TEST_CASE("build_instance validates shapes") {
  auto inst = build_instance({-5, -4}, {dense_row({3, 2}, 4)}, {}, {0, 1},
                             {{0, 1}, {0, 1}});
  CHECK(inst.num_vars() == 2);
  CHECK(inst.num_rows() == 1);
  CHECK(inst.integer_set == std::vector<int>{0, 1});
}

TEST_CASE("build_instance rejects invalid bounds") {
  CHECK_THROWS_WITH_AS(build_instance({1.0}, {dense_row({1}, 1)}, {}, {},
                                      {{2.0, 1.0}}),
                       doctest::Contains("invalid bounds"), MilpError);
}

TEST_CASE("maximize input is negated on ingestion") {
  auto inst = build_instance({5, 4}, {dense_row({3, 2}, 4)}, {}, {0, 1},
                             {{0, 1}, {0, 1}}, /*maximize=*/true);
  CHECK(inst.objective == std::vector<double>{-5, -4});
  CHECK(inst.negated_from_max);
  CHECK(inst.original_objective(-5.0) == 5.0);
}

TEST_CASE("build_instance rejects bad inputs") {
  CHECK_THROWS_AS(build_instance({}, {dense_row({1}, 1)}, {}, {}, {}), MilpError);
  CHECK_THROWS_AS(build_instance({1, 2}, {dense_row({1}, 1)}, {}, {}, {{0, 1}}), MilpError);
  CHECK_THROWS_AS(build_instance({1}, {dense_row({std::nan("")}, 1)}, {}, {}, {{0, 1}}),
                  MilpError);
  // integer variables need finite bounds
  CHECK_THROWS_AS(build_instance({1}, {dense_row({1}, 1)}, {}, {0}, {{0, kInf}}), MilpError);
  // out-of-range integer index
  CHECK_THROWS_AS(build_instance({1}, {dense_row({1}, 1)}, {}, {3}, {{0, 1}}), MilpError);
}

TEST_CASE("explicit zeros are dropped and senses are canonicalized") {
  SparseRow raw;
  raw.index = {0, 1};
  raw.value = {0.0, 2.0};
  raw.rhs = -3.0;
  auto inst = build_instance({1, 1}, {raw}, {RowSense::GreaterEqual}, {},
                             {{0, 5}, {0, 5}});
  REQUIRE(inst.num_rows() == 1);
  CHECK(inst.rows[0].index == std::vector<int>{1});
  CHECK(inst.rows[0].value == std::vector<double>{-2.0});
  CHECK(inst.rows[0].rhs == 3.0);
}

TEST_CASE("equality rows expand to two inequalities") {
  auto inst = build_instance({1, 1}, {dense_row({1, 1}, 2)}, {RowSense::Equal}, {},
                             {{0, 5}, {0, 5}});
  CHECK(inst.num_rows() == 2);
  CHECK(inst.rows[1].rhs == -2.0);
}

TEST_CASE("integer bounds are tightened to the integral hull") {
  auto inst = build_instance({1}, {dense_row({1}, 10)}, {}, {0}, {{0.4, 3.7}});
  CHECK(inst.lower[0] == 1.0);
  CHECK(inst.upper[0] == 3.0);
}

TEST_CASE("check_feasible on the knapsack example") {
  // max 5x1 + 4x2 s.t. 3x1 + 2x2 <= 4, x binary
  auto inst = binary_instance({5, 4}, {{3, 2}}, {4}, /*maximize=*/true);
  SolverTolerances tol;
  CHECK(check_feasible(inst, {1, 0}, tol));
  CHECK_FALSE(check_feasible(inst, {1, 1}, tol));       // weight 5 > 4
  CHECK_FALSE(check_feasible(inst, {0.5, 0}, tol));     // integrality
  CHECK_FALSE(check_feasible(inst, {-0.5, 0}, tol));    // bound
}

TEST_CASE("brute force solves the knapsack example") {
  auto inst = binary_instance({5, 4}, {{3, 2}}, {4}, /*maximize=*/true);
  const auto res = brute_force_opt(inst);
  REQUIRE(res.feasible);
  CHECK(res.objective == -5.0);  // canonical minimize sense
  CHECK(inst.original_objective(res.objective) == 5.0);
  CHECK(res.x == std::vector<double>{1, 0});
}

TEST_CASE("brute force reports infeasibility") {
  auto inst = binary_instance({1, 1}, {{1, 1}}, {-1});
  CHECK_FALSE(brute_force_opt(inst).feasible);
}

TEST_CASE("brute force enforces the enumeration cap") {
  std::vector<double> c(25, 1.0);
  std::vector<std::vector<double>> rows{std::vector<double>(25, 1.0)};
  auto inst = binary_instance(std::move(c), rows, {10});
  CHECK_THROWS_WITH_AS(brute_force_opt(inst), doctest::Contains("cap"), MilpError);
}

TEST_CASE("brute force rejects continuous variables") {
  auto inst = build_instance({1, 1}, {dense_row({1, 1}, 2)}, {}, {0}, {{0, 1}, {0, 1}});
  CHECK_THROWS_AS(brute_force_opt(inst), MilpError);
}

TEST_CASE("brute force breaks ties lexicographically") {
  // both (0,1) and (1,0) reach objective -1
  auto inst = binary_instance({-1, -1}, {{1, 1}}, {1});
  const auto res = brute_force_opt(inst);
  CHECK(res.objective == -1.0);
  CHECK(res.x == std::vector<double>{0, 1});
}

TEST_CASE("brute force matches an independent reference enumerator") {
  Rng rng(20240811);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = random_binary_instance(rng, 12, 6);
    const auto fast = brute_force_opt(inst);
    const auto ref = enumerate_binary_reference(inst);
    REQUIRE(fast.feasible == ref.feasible);
    if (fast.feasible) {
      CHECK(fast.objective == doctest::Approx(ref.objective).epsilon(1e-12));
      CHECK(fast.x == ref.x);
    }
  }
}

TEST_CASE("nonbinary integer ranges enumerate correctly") {
  // min x0 - 2 x1 over x0 in [0..3], x1 in [0..2], x0 + x1 <= 3
  auto inst = build_instance({1, -2}, {dense_row({1, 1}, 3)}, {}, {0, 1},
                             {{0, 3}, {0, 2}});
  const auto res = brute_force_opt(inst);
  REQUIRE(res.feasible);
  CHECK(res.objective == -4.0);
  CHECK(res.x == std::vector<double>{0, 2});
}
