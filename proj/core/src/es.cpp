#include "cutstop/es.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cutstop/policy.hpp"

namespace cutstop {

void EsConfig::validate(std::size_t dim) const {
  if (perturbations < 2) throw MilpError("es needs at least 2 perturbations");
  if (mirrored && perturbations % 2 != 0)
    throw MilpError("mirrored sampling needs an even perturbation count");
  if (!(sigma > 0)) throw MilpError("sigma must be positive");
  if (!(learning_rate > 0)) throw MilpError("learning rate must be positive");
  if (iterations < 0) throw MilpError("iteration count must be non-negative");
  if (dim == 0) throw MilpError("empty parameter vector");
}

std::vector<std::vector<double>> sample_perturbations(int k, double sigma, std::size_t dim,
                                                      bool mirrored, Rng& rng) {
  std::vector<std::vector<double>> eps;
  eps.reserve(static_cast<std::size_t>(k));
  if (mirrored) {
    for (int i = 0; i < k / 2; ++i) {
      std::vector<double> e(dim);
      for (double& v : e) v = sigma * rng.normal();
      std::vector<double> neg(dim);
      for (std::size_t j = 0; j < dim; ++j) neg[j] = -e[j];
      eps.push_back(std::move(e));
      eps.push_back(std::move(neg));
    }
  } else {
    for (int i = 0; i < k; ++i) {
      std::vector<double> e(dim);
      for (double& v : e) v = sigma * rng.normal();
      eps.push_back(std::move(e));
    }
  }
  return eps;
}

std::vector<double> compute_rewards(const std::vector<double>& performance) {
  const std::size_t k = performance.size();
  if (k == 0) throw MilpError("empty performance vector");
  double mean = 0.0;
  for (double p : performance) {
    if (!std::isfinite(p)) throw MilpError("non-finite candidate performance");
    mean += p;
  }
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double p : performance) var += (p - mean) * (p - mean);
  const double std_dev = std::sqrt(var / static_cast<double>(k));

  // standardize, negate (lower performance is better), softmax
  std::vector<double> r(k);
  double zmax = -kInf;
  for (std::size_t i = 0; i < k; ++i) {
    r[i] = -(performance[i] - mean) / (std_dev + 1e-8);
    zmax = std::max(zmax, r[i]);
  }
  double sum = 0.0;
  for (double& v : r) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : r) v /= sum;
  return r;
}

double reward_entropy(const std::vector<double>& rewards) {
  double h = 0.0;
  for (double r : rewards)
    if (r > 0) h -= r * std::log(r);
  return h;
}

std::vector<double> estimate_gradient(const std::vector<std::vector<double>>& perturbations,
                                      const std::vector<double>& rewards, double sigma) {
  if (perturbations.size() != rewards.size())
    throw MilpError("perturbation and reward counts differ");
  if (perturbations.empty()) throw MilpError("no perturbations");
  const std::size_t dim = perturbations.front().size();
  const double scale = 1.0 / (static_cast<double>(perturbations.size()) * sigma);
  std::vector<double> g(dim, 0.0);
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    if (perturbations[i].size() != dim) throw MilpError("perturbation length mismatch");
    const double r = rewards[i];
    for (std::size_t j = 0; j < dim; ++j) g[j] += r * perturbations[i][j];
  }
  for (double& v : g) v *= scale;
  return g;
}

void adam_step(std::vector<double>& theta, const std::vector<double>& grad,
               AdamState& moments, const EsConfig& config) {
  const std::size_t dim = theta.size();
  if (grad.size() != dim) throw MilpError("gradient length mismatch");
  if (moments.m.empty()) {
    moments.m.assign(dim, 0.0);
    moments.v.assign(dim, 0.0);
  }
  if (moments.m.size() != dim) throw MilpError("moment length mismatch");
  ++moments.step;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(moments.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(moments.step));
  for (std::size_t j = 0; j < dim; ++j) {
    moments.m[j] = config.beta1 * moments.m[j] + (1.0 - config.beta1) * grad[j];
    moments.v[j] = config.beta2 * moments.v[j] + (1.0 - config.beta2) * grad[j] * grad[j];
    const double mhat = moments.m[j] / bc1;
    const double vhat = moments.v[j] / bc2;
    theta[j] += config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
  }
}

TrainResult run_es(const EsConfig& config, const BatchEvaluator& evaluate,
                   std::vector<double> init,
                   const std::function<void(const IterationRecord&)>& on_iteration) {
  config.validate(init.size());
  const std::size_t dim = init.size();
  const Rng master(config.seed);

  TrainResult result;
  std::vector<double> theta = std::move(init);
  AdamState adam;

  const auto center_performance = [&](const std::vector<double>& t) {
    return evaluate({t}).at(0);
  };

  result.initial_performance = center_performance(theta);
  result.best_theta = theta;
  result.best_performance = result.initial_performance;
  result.best_iteration = 0;

  for (int iter = 1; iter <= config.iterations; ++iter) {
    Rng rng = master.fork(static_cast<std::uint64_t>(iter));
    const auto eps =
        sample_perturbations(config.perturbations, config.sigma, dim, config.mirrored, rng);

    std::vector<std::vector<double>> candidates(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      candidates[i] = theta;
      for (std::size_t j = 0; j < dim; ++j) candidates[i][j] += eps[i][j];
    }
    const std::vector<double> p = evaluate(candidates);
    if (p.size() != eps.size()) throw MilpError("evaluator returned a short batch");

    const std::vector<double> r = compute_rewards(p);
    const std::vector<double> g = estimate_gradient(eps, r, config.sigma);
    adam_step(theta, g, adam, config);

    IterationRecord rec;
    rec.iteration = iter;
    double sum = 0.0, best = kInf;
    for (double v : p) {
      sum += v;
      best = std::min(best, v);
    }
    rec.mean_performance = sum / static_cast<double>(p.size());
    rec.best_performance = best;
    rec.center_performance = center_performance(theta);
    rec.reward_entropy = reward_entropy(r);
    result.history.push_back(rec);
    if (on_iteration) on_iteration(rec);

    if (rec.center_performance < result.best_performance) {
      result.best_performance = rec.center_performance;
      result.best_theta = theta;
      result.best_iteration = iter;
    }
  }
  return result;
}

double evaluate_candidate(const HygroParams& params,
                          const std::vector<const MilpInstance*>& batch,
                          const SolveConfig& solve_config, EsConfig::Metric metric,
                          double fail_penalty) {
  if (batch.empty()) throw MilpError("empty evaluation batch");
  PolicyParams pp;
  pp.hygro = std::make_shared<HygroParams>(params);
  const auto policy = make_policy(PolicyKind::Hygro, pp, solve_config.seed);

  double sum = 0.0;
  for (const MilpInstance* inst : batch) {
    double value;
    try {
      const SolveStats stats = solve(*inst, *policy, solve_config);
      switch (metric) {
        case EsConfig::Metric::LogicalRounds: value = static_cast<double>(stats.lp_solves); break;
        case EsConfig::Metric::Pdi: value = stats.pdi; break;
        case EsConfig::Metric::WallTime: value = stats.wall_time_seconds; break;
        default: value = fail_penalty; break;
      }
    } catch (const MilpError&) {
      value = fail_penalty;
    }
    sum += value;
  }
  return sum / static_cast<double>(batch.size());
}

namespace {

double default_fail_penalty(const EsConfig& config, const SolveConfig& solve_config) {
  if (config.fail_penalty > 0) return config.fail_penalty;
  return config.metric == EsConfig::Metric::WallTime ? solve_config.time_limit_seconds : 1e6;
}

}  // namespace

TrainResult train(const EsConfig& config, const std::vector<MilpInstance>& instances,
                  const HygroParams& init, const SolveConfig& solve_config,
                  const std::function<void(const IterationRecord&)>& on_iteration) {
  if (instances.empty()) throw MilpError("training needs at least one instance");
  const double penalty = default_fail_penalty(config, solve_config);
  const Rng master(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const HygroConfig net = init.config;

  // candidates of one iteration share a batch; the center evaluation always
  // uses the full set so iterations stay comparable for model selection
  std::vector<const MilpInstance*> full;
  full.reserve(instances.size());
  for (const auto& inst : instances) full.push_back(&inst);

  int batch_epoch = 0;
  const int threads = config.threads > 0
                          ? config.threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const BatchEvaluator evaluator = [&, batch_epoch](
                                       const std::vector<std::vector<double>>& thetas) mutable {
    // iteration batch: deterministic subset keyed by the candidate-batch epoch
    std::vector<const MilpInstance*> batch;
    if (thetas.size() == 1) {
      batch = full;  // center evaluation
    } else if (config.batch_size >= static_cast<int>(instances.size())) {
      batch = full;
    } else {
      Rng rng = master.fork(static_cast<std::uint64_t>(batch_epoch++));
      std::vector<int> idx(instances.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      for (int i = 0; i < config.batch_size; ++i) {
        const int pick = i + static_cast<int>(rng.uniform_int(0, static_cast<int>(idx.size()) - 1 - i));
        std::swap(idx[i], idx[pick]);
      }
      for (int i = 0; i < config.batch_size; ++i) batch.push_back(&instances[idx[i]]);
    }

    std::vector<double> results(thetas.size(), 0.0);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= thetas.size()) break;
        HygroParams cand;
        cand.config = net;
        cand.theta = thetas[i];
        results[i] = evaluate_candidate(cand, batch, solve_config, config.metric, penalty);
      }
    };
    if (threads <= 1 || thetas.size() <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      const int spawn = std::min<int>(threads, static_cast<int>(thetas.size()));
      pool.reserve(static_cast<std::size_t>(spawn));
      for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    bool any_ok = false;
    for (double v : results)
      if (v != penalty) any_ok = true;
    if (!any_ok && thetas.size() > 1)
      throw MilpError("every candidate failed in an es iteration");
    return results;
  };

  return run_es(config, evaluator, init.theta, on_iteration);
}

}  // namespace cutstop
