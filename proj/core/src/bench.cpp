#include "cutstop/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cutstop/policy.hpp"

namespace cutstop {

double metric_value(const SolveStats& stats, EsConfig::Metric metric) {
  switch (metric) {
    case EsConfig::Metric::LogicalRounds: return static_cast<double>(stats.lp_solves);
    case EsConfig::Metric::Pdi: return stats.pdi;
    case EsConfig::Metric::WallTime: return stats.wall_time_seconds;
  }
  throw MilpError("unknown metric");
}

double improvement_pct(double reference, double value) {
  if (reference == 0.0) throw MilpError("improvement undefined for a zero reference");
  return (reference - value) / reference * 100.0;
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.std_dev = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

void run_pairs(std::size_t count, int threads, const std::function<void(std::size_t)>& work) {
  const int n = threads > 0 ? threads
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (n <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      work(i);
    }
  };
  std::vector<std::thread> pool;
  const int spawn = std::min<std::size_t>(n, count);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

BenchResult run_benchmark(const std::vector<MilpInstance>& instances,
                          const std::vector<std::string>& policy_specs,
                          const SolveConfig& config, const std::string& reference_spec,
                          EsConfig::Metric metric, int threads) {
  if (instances.empty()) throw MilpError("benchmark needs instances");
  if (std::find(policy_specs.begin(), policy_specs.end(), reference_spec) == policy_specs.end())
    throw MilpError("reference policy '" + reference_spec + "' is not in the policy list");

  BenchResult result;
  result.reference = reference_spec;
  result.rows.resize(instances.size() * policy_specs.size());

  run_pairs(result.rows.size(), threads, [&](std::size_t i) {
    const std::size_t pi = i / instances.size();
    const std::size_t ii = i % instances.size();
    BenchRow& row = result.rows[i];
    row.instance = instances[ii].name;
    row.policy = policy_specs[pi];
    try {
      // one policy object per solve: rng state is never shared across pairs
      const auto policy = make_policy(policy_specs[pi], config.seed);
      row.stats = solve(instances[ii], *policy, config);
    } catch (const MilpError& e) {
      row.failed = true;
      row.error = e.what();
    }
  });

  double reference_metric = 0.0;
  std::vector<PolicyAggregate> aggs;
  for (std::size_t pi = 0; pi < policy_specs.size(); ++pi) {
    PolicyAggregate agg;
    agg.policy = policy_specs[pi];
    std::vector<double> times, pdis, metrics;
    for (std::size_t ii = 0; ii < instances.size(); ++ii) {
      const BenchRow& row = result.rows[pi * instances.size() + ii];
      if (row.failed) {
        ++agg.failures;
        continue;
      }
      ++agg.solved;
      times.push_back(row.stats.wall_time_seconds);
      pdis.push_back(row.stats.pdi);
      metrics.push_back(metric_value(row.stats, metric));
    }
    const MeanStd t = mean_std(times), p = mean_std(pdis), m = mean_std(metrics);
    agg.mean_time = t.mean;
    agg.std_time = t.std_dev;
    agg.mean_pdi = p.mean;
    agg.std_pdi = p.std_dev;
    agg.mean_metric = m.mean;
    agg.std_metric = m.std_dev;
    if (policy_specs[pi] == reference_spec) reference_metric = agg.mean_metric;
    aggs.push_back(std::move(agg));
  }
  for (auto& agg : aggs)
    agg.improvement =
        reference_metric != 0.0 ? improvement_pct(reference_metric, agg.mean_metric) : 0.0;
  result.aggregates = std::move(aggs);
  return result;
}

std::vector<SweepCurve> sweep_rounds(const std::vector<MilpInstance>& instances,
                                     int max_rounds, const SolveConfig& config,
                                     EsConfig::Metric metric, int threads) {
  if (max_rounds < 1) throw MilpError("sweep needs max_rounds >= 1");
  std::vector<SweepCurve> curves(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    curves[i].instance = instances[i].name;
    curves[i].metric_by_rounds.assign(static_cast<std::size_t>(max_rounds), 0.0);
  }

  SolveConfig sweep_config = config;
  sweep_config.policy_depth_limit = 0;               // decisions at the root only
  sweep_config.fallback = FallbackPolicy::NoCuts;    // deeper nodes add no cuts
  sweep_config.hard_round_cap = std::max(config.hard_round_cap, max_rounds);

  const std::size_t total = instances.size() * static_cast<std::size_t>(max_rounds);
  run_pairs(total, threads, [&](std::size_t task) {
    const std::size_t ii = task / max_rounds;
    const int rounds = static_cast<int>(task % max_rounds) + 1;
    PolicyParams params;
    params.fcr_max_rounds = rounds;
    const auto policy = make_policy(PolicyKind::Fcr, params, sweep_config.seed);
    const SolveStats stats = solve(instances[ii], *policy, sweep_config);
    curves[ii].metric_by_rounds[rounds - 1] = metric_value(stats, metric);
  });

  for (auto& curve : curves) {
    const auto it =
        std::min_element(curve.metric_by_rounds.begin(), curve.metric_by_rounds.end());
    curve.argmin_round = static_cast<int>(it - curve.metric_by_rounds.begin()) + 1;
  }
  return curves;
}

std::vector<ScatterRecord> export_scatter(
    const std::map<std::string, double>& policy_metric_by_instance,
    const std::vector<SweepCurve>& curves, const std::vector<int>& thresholds) {
  std::vector<ScatterRecord> records;
  for (const auto& curve : curves) {
    const auto it = policy_metric_by_instance.find(curve.instance);
    if (it == policy_metric_by_instance.end())
      throw MilpError("no policy metric for instance " + curve.instance);
    for (int threshold : thresholds) {
      if (threshold < 1 || threshold > static_cast<int>(curve.metric_by_rounds.size()))
        throw MilpError("scatter threshold exceeds the sweep curve length");
      ScatterRecord rec;
      rec.instance = curve.instance;
      rec.threshold = threshold;
      rec.policy_metric = it->second;
      rec.sweep_best = *std::min_element(curve.metric_by_rounds.begin(),
                                         curve.metric_by_rounds.begin() + threshold);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace cutstop
