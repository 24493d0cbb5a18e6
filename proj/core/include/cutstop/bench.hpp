#pragma once

#include <map>
#include <string>
#include <vector>

#include "cutstop/es.hpp"
#include "cutstop/milp.hpp"
#include "cutstop/solver.hpp"

namespace cutstop {

double metric_value(const SolveStats& stats, EsConfig::Metric metric);

// (reference - value) / reference * 100; positive when `value` is better.
double improvement_pct(double reference, double value);

struct BenchRow {
  std::string instance;
  std::string policy;
  bool failed = false;
  std::string error;
  SolveStats stats;
};

struct PolicyAggregate {
  std::string policy;
  int solved = 0;
  int failures = 0;
  double mean_time = 0.0;
  double std_time = 0.0;
  double mean_pdi = 0.0;
  double std_pdi = 0.0;
  double mean_metric = 0.0;
  double std_metric = 0.0;
  double improvement = 0.0;  // vs the reference policy, percent
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<PolicyAggregate> aggregates;
  std::string reference;
};

// Solves every (instance, policy) pair; per-pair failures are recorded, not
// fatal. Aggregates report mean (standard deviation) per policy plus the
// improvement over the reference policy.
BenchResult run_benchmark(const std::vector<MilpInstance>& instances,
                          const std::vector<std::string>& policy_specs,
                          const SolveConfig& config, const std::string& reference_spec,
                          EsConfig::Metric metric, int threads = 0);

struct SweepCurve {
  std::string instance;
  std::vector<double> metric_by_rounds;  // entry j-1 is FCR(t=j)
  int argmin_round = 1;
};

// For j = 1..max_rounds solve with FCR(t=j) and root-only cutting,
// recording the metric curve per instance.
std::vector<SweepCurve> sweep_rounds(const std::vector<MilpInstance>& instances,
                                     int max_rounds, const SolveConfig& config,
                                     EsConfig::Metric metric, int threads = 0);

struct ScatterRecord {
  std::string instance;
  int threshold = 0;
  double policy_metric = 0.0;  // P_H
  double sweep_best = 0.0;     // P*_S: best curve value over rounds <= threshold
};

// Four records per instance by default: the policy metric against the best
// exhaustive-search value within each round threshold.
std::vector<ScatterRecord> export_scatter(
    const std::map<std::string, double>& policy_metric_by_instance,
    const std::vector<SweepCurve>& curves,
    const std::vector<int>& thresholds = {25, 50, 75, 100});

}  // namespace cutstop
