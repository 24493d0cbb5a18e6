#pragma once

#include <functional>
#include <vector>

#include "cutstop/hygro.hpp"
#include "cutstop/milp.hpp"
#include "cutstop/solver.hpp"

namespace cutstop {

struct EsConfig {
  int perturbations = 32;  // k
  double sigma = 0.05;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int iterations = 200;
  bool mirrored = true;

  enum class Metric { LogicalRounds, Pdi, WallTime };
  Metric metric = Metric::LogicalRounds;

  int batch_size = 16;  // instances per candidate and iteration
  std::uint64_t seed = 0;
  int threads = 0;           // 0 = hardware concurrency
  double fail_penalty = 0.0; // 0 = derived from the metric

  void validate(std::size_t dim) const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

struct IterationRecord {
  int iteration = 0;  // 0 is the evaluation of the initial parameters
  double mean_performance = 0.0;
  double best_performance = 0.0;
  double center_performance = 0.0;
  double reward_entropy = 0.0;
};

struct TrainResult {
  std::vector<double> best_theta;
  double best_performance = 0.0;
  int best_iteration = 0;            // 0 when the initial parameters won
  double initial_performance = 0.0;  // center evaluation before training
  std::vector<IterationRecord> history;  // one record per iteration
};

// k perturbation vectors, i.i.d. N(0, sigma^2) per coordinate; mirrored
// sampling emits pairs (eps, -eps) with -eps copied exactly.
std::vector<std::vector<double>> sample_perturbations(int k, double sigma, std::size_t dim,
                                                      bool mirrored, Rng& rng);

// Softmax of the negated standardized performances: lower p (better)
// receives higher reward. Sums to 1, every entry positive.
std::vector<double> compute_rewards(const std::vector<double>& performance);

double reward_entropy(const std::vector<double>& rewards);

// ghat = (1 / (k * sigma)) * sum_i r_i eps_i, accumulated by candidate
// index so mirrored ties cancel exactly.
std::vector<double> estimate_gradient(const std::vector<std::vector<double>>& perturbations,
                                      const std::vector<double>& rewards, double sigma);

// Bias-corrected ADAM ascent step on the reward gradient.
void adam_step(std::vector<double>& theta, const std::vector<double>& grad,
               AdamState& moments, const EsConfig& config);

// Evaluates all candidate vectors of one iteration; results are indexed by
// candidate, independent of evaluation order.
using BatchEvaluator =
    std::function<std::vector<double>(const std::vector<std::vector<double>>&)>;

// Generic ES minimization of a black-box objective (lower is better).
// Tracks the center parameters each iteration and returns the best center
// seen, the initial parameters included.
TrainResult run_es(const EsConfig& config, const BatchEvaluator& evaluate,
                   std::vector<double> init,
                   const std::function<void(const IterationRecord&)>& on_iteration = {});

// Mean metric of a HYGRO candidate across an instance batch; solver
// failures yield the fail penalty.
double evaluate_candidate(const HygroParams& params,
                          const std::vector<const MilpInstance*>& batch,
                          const SolveConfig& solve_config, EsConfig::Metric metric,
                          double fail_penalty);

// Solver-backed ES training of the HYGRO policy. Candidates of one
// iteration share the iteration's instance batch and run in parallel.
TrainResult train(const EsConfig& config, const std::vector<MilpInstance>& instances,
                  const HygroParams& init, const SolveConfig& solve_config,
                  const std::function<void(const IterationRecord&)>& on_iteration = {});

}  // namespace cutstop
