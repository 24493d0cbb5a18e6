#include <doctest.h>

#include <cmath>

#include "cutstop/bench.hpp"
#include "cutstop/generators.hpp"
#include "cutstop/io.hpp"
#include "cutstop/policy.hpp"
#include "test_util.hpp"

using namespace cutstop;
using namespace cutstop::testing;

namespace {

SolveConfig fast_config() {
  SolveConfig config;
  config.time_limit_seconds = 60.0;
  return config;
}

}  // namespace

TEST_CASE("set cover instances are feasible by construction") {
  const auto inst = gen_set_cover(15, 30, 0.2, 5);
  CHECK(inst.num_vars() == 30);
  CHECK(inst.num_rows() == 15);
  // every coverage row (stored negated) has at least two covering columns
  for (const auto& row : inst.rows) CHECK(row.size() >= 2);
  const std::vector<double> all_ones(30, 1.0);
  CHECK(check_feasible(inst, all_ones, SolverTolerances{}));
}

TEST_CASE("desk-scale set cover agrees with the brute-force oracle") {
  const auto inst = gen_set_cover(8, 14, 0.25, 11);
  const auto exact = brute_force_opt(inst);
  REQUIRE(exact.feasible);
  const auto policy = make_policy("default", 0);
  const auto stats = solve(inst, *policy, fast_config());
  CHECK(stats.best_objective == exact.objective);
}

TEST_CASE("generators are byte-deterministic in the seed") {
  CHECK(instance_to_json(gen_set_cover(10, 20, 0.3, 7)) ==
        instance_to_json(gen_set_cover(10, 20, 0.3, 7)));
  CHECK(instance_to_json(gen_multi_knapsack(8, 2, 3)) ==
        instance_to_json(gen_multi_knapsack(8, 2, 3)));
  CHECK(instance_to_json(gen_mis(12, 3, 9)) == instance_to_json(gen_mis(12, 3, 9)));
  CHECK(instance_to_json(gen_mis(12, 3, 9)) != instance_to_json(gen_mis(12, 3, 10)));
}

TEST_CASE("multi knapsack shape and capacity arithmetic") {
  const auto inst = gen_multi_knapsack(6, 2, 41);
  CHECK(inst.num_vars() == 12);
  CHECK(inst.num_rows() == 2 + 6);
  CHECK(inst.negated_from_max);

  // capacity rows come first; their rhs is ceil(total_weight / (2*K))
  double total_weight = 0.0;
  for (std::size_t k = 0; k < inst.rows[0].size(); ++k) total_weight += inst.rows[0].value[k];
  // row 0 holds each item's weight once (one column per sack assignment)
  CHECK(inst.rows[0].rhs == std::ceil(total_weight / 2.0 / 2.0));
  CHECK(inst.rows[0].rhs == inst.rows[1].rhs);

  const auto exact = brute_force_opt(inst);
  REQUIRE(exact.feasible);
  const auto policy = make_policy("default", 0);
  CHECK(solve(inst, *policy, fast_config()).best_objective == exact.objective);
}

TEST_CASE("mis on a triangle has independence number 1") {
  const auto inst = gen_mis(3, 2, 1);
  CHECK(inst.num_rows() == 3);  // complete graph on 3 nodes
  const auto policy = make_policy("default", 0);
  const auto stats = solve(inst, *policy, fast_config());
  CHECK(inst.original_objective(stats.best_objective) == 1.0);
}

TEST_CASE("mis formulation on a path of five nodes") {
  std::vector<std::vector<double>> rows;
  for (int e = 0; e < 4; ++e) {
    std::vector<double> row(5, 0.0);
    row[e] = 1.0;
    row[e + 1] = 1.0;
    rows.push_back(row);
  }
  const auto inst =
      binary_instance(std::vector<double>(5, 1.0), rows, std::vector<double>(4, 1.0),
                      /*maximize=*/true);
  const auto exact = brute_force_opt(inst);
  CHECK(inst.original_objective(exact.objective) == 3.0);
  const auto policy = make_policy("default", 0);
  CHECK(solve(inst, *policy, fast_config()).best_objective == exact.objective);
}

TEST_CASE("mis scales rows roughly with affinity") {
  const auto inst = gen_mis(40, 4, 77);
  CHECK(inst.num_rows() > 80);
  CHECK(inst.num_rows() < 4 * 40);
}

TEST_CASE("generator preconditions") {
  CHECK_THROWS_AS(gen_set_cover(5, 1, 0.5, 0), MilpError);
  CHECK_THROWS_AS(gen_set_cover(5, 10, 0.0, 0), MilpError);
  CHECK_THROWS_AS(gen_multi_knapsack(2, 3, 0), MilpError);
  CHECK_THROWS_AS(gen_mis(5, 0, 0), MilpError);
}

TEST_CASE("improvement percentages reproduce the reference arithmetic") {
  CHECK(improvement_pct(5.15, 3.91) == doctest::Approx(24.08).epsilon(0.0005));
  CHECK(improvement_pct(13.34, 9.12) == doctest::Approx(31.63).epsilon(0.0005));
  CHECK(improvement_pct(7.0, 7.0) == 0.0);
  CHECK_THROWS_AS(improvement_pct(0.0, 1.0), MilpError);
}

TEST_CASE("benchmark aggregates and the reference identity") {
  std::vector<MilpInstance> instances;
  for (int i = 0; i < 3; ++i) instances.push_back(gen_multi_knapsack(6, 2, 100 + i));
  const std::vector<std::string> policies = {"default", "nocuts"};
  const auto result = run_benchmark(instances, policies, fast_config(), "default",
                                    EsConfig::Metric::LogicalRounds, 1);
  CHECK(result.rows.size() == 6);
  REQUIRE(result.aggregates.size() == 2);
  for (const auto& agg : result.aggregates) {
    CHECK(agg.solved == 3);
    CHECK(agg.failures == 0);
    if (agg.policy == "default") CHECK(agg.improvement == 0.0);
  }
  CHECK_THROWS_AS(run_benchmark(instances, policies, fast_config(), "missing",
                                EsConfig::Metric::LogicalRounds, 1),
                  MilpError);
}

TEST_CASE("sweep produces one curve point per round budget") {
  std::vector<MilpInstance> instances = {gen_multi_knapsack(6, 2, 3),
                                         gen_set_cover(6, 12, 0.3, 4)};
  const auto curves = sweep_rounds(instances, 5, fast_config(), EsConfig::Metric::LogicalRounds, 1);
  REQUIRE(curves.size() == 2);
  for (const auto& curve : curves) {
    CHECK(curve.metric_by_rounds.size() == 5);
    CHECK(curve.argmin_round >= 1);
    CHECK(curve.argmin_round <= 5);
  }

  // the j=1 point must equal a standalone FCR(t=1) root-only run
  SolveConfig config = fast_config();
  config.fallback = FallbackPolicy::NoCuts;
  const auto policy = make_policy("fcr:t=1", config.seed);
  const auto standalone = solve(instances[0], *policy, config);
  CHECK(curves[0].metric_by_rounds[0] ==
        metric_value(standalone, EsConfig::Metric::LogicalRounds));
}

TEST_CASE("scatter records are monotone in the threshold") {
  SweepCurve curve;
  curve.instance = "a";
  for (int j = 0; j < 100; ++j)
    curve.metric_by_rounds.push_back(50.0 - 0.3 * j + (j % 7));  // noisy decreasing
  std::map<std::string, double> hygro{{"a", 21.0}};
  const auto records = export_scatter(hygro, {curve});
  REQUIRE(records.size() == 4);
  double prev = kInf;
  for (const auto& rec : records) {
    CHECK(rec.policy_metric == 21.0);
    CHECK(rec.sweep_best <= prev);
    prev = rec.sweep_best;
  }

  SUBCASE("constant curves give identical records") {
    SweepCurve flat;
    flat.instance = "b";
    flat.metric_by_rounds.assign(100, 4.0);
    std::map<std::string, double> metrics{{"b", 1.0}};
    const auto recs = export_scatter(metrics, {flat});
    for (const auto& rec : recs) CHECK(rec.sweep_best == 4.0);
  }

  SUBCASE("missing instances and short curves are errors") {
    std::map<std::string, double> wrong{{"zzz", 1.0}};
    CHECK_THROWS_AS(export_scatter(wrong, {curve}), MilpError);
    SweepCurve tiny;
    tiny.instance = "a";
    tiny.metric_by_rounds.assign(10, 1.0);
    CHECK_THROWS_AS(export_scatter(hygro, {tiny}), MilpError);
  }
}
