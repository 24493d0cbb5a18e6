#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "cutstop/es.hpp"
#include "cutstop/generators.hpp"

using namespace cutstop;

namespace {

double norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("mirrored perturbations pair up exactly") {
  Rng rng(1);
  const auto eps = sample_perturbations(4, 0.5, 6, true, rng);
  REQUIRE(eps.size() == 4);
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(eps[1][j] == -eps[0][j]);
    CHECK(eps[3][j] == -eps[2][j]);
  }
}

TEST_CASE("perturbation sampling is seed-deterministic") {
  Rng a(42), b(42);
  const auto ea = sample_perturbations(8, 0.1, 10, true, a);
  const auto eb = sample_perturbations(8, 0.1, 10, true, b);
  CHECK(ea == eb);
}

TEST_CASE("sample mean concentrates like a normal") {
  Rng rng(7);
  const double sigma = 0.3;
  const int draws = 100000;
  const auto eps = sample_perturbations(draws, sigma, 1, false, rng);
  double mean = 0.0;
  for (const auto& e : eps) mean += e[0];
  mean /= draws;
  CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("rewards form a simplex and invert the performance order") {
  SUBCASE("ties split evenly") {
    const auto r = compute_rewards({1.0, 1.0, 1.0});
    for (double v : r) CHECK(v == doctest::Approx(1.0 / 3));
  }
  SUBCASE("the better candidate earns more") {
    const auto r = compute_rewards({1.0, 2.0});
    CHECK(r[0] > r[1]);
    CHECK(r[0] + r[1] == doctest::Approx(1.0));
  }
  SUBCASE("hand evaluation of the standardized softmax") {
    const auto r = compute_rewards({0.0, 10.0, 20.0});
    CHECK(r[0] == doctest::Approx(0.724548274927442).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(0.212895944253151).epsilon(1e-12));
    CHECK(r[2] == doctest::Approx(0.062555780819407).epsilon(1e-12));
    CHECK(r[0] > r[1]);
    CHECK(r[1] > r[2]);
  }
  SUBCASE("anti-monotone on random vectors") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> p(6);
      for (double& v : p) v = rng.uniform(0.0, 50.0);
      const auto r = compute_rewards(p);
      double sum = 0.0;
      for (double v : r) {
        CHECK(v > 0.0);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j)
          if (p[i] < p[j]) CHECK(r[i] > r[j]);
    }
  }
}

TEST_CASE("gradient estimation") {
  SUBCASE("two-term sum") {
    const std::vector<double> u = {1.0, -2.0, 3.0};
    std::vector<double> nu = u;
    for (double& v : nu) v = -v;
    const auto g = estimate_gradient({u, nu}, {1.0, 0.0}, 1.0);
    for (std::size_t j = 0; j < u.size(); ++j) CHECK(g[j] == doctest::Approx(u[j] / 2));
  }
  SUBCASE("mirrored ties cancel exactly") {
    Rng rng(11);
    const auto eps = sample_perturbations(8, 0.3, 12, true, rng);
    const auto r = compute_rewards(std::vector<double>(8, 5.0));
    const auto g = estimate_gradient(eps, r, 0.3);
    for (double v : g) CHECK(v == 0.0);  // bitwise zero
  }
  SUBCASE("matches an independent summation order") {
    Rng rng(13);
    const auto eps = sample_perturbations(4, 1.0, 3, false, rng);
    const std::vector<double> r = {0.1, 0.2, 0.3, 0.4};
    const auto g = estimate_gradient(eps, r, 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      double ref = 0.0;
      for (std::size_t i = 0; i < 4; ++i) ref += r[i] * eps[i][j];
      ref /= 4.0;
      CHECK(g[j] == doctest::Approx(ref).epsilon(1e-14));
    }
  }
  SUBCASE("length mismatches throw") {
    CHECK_THROWS_AS(estimate_gradient({{1.0}}, {1.0, 2.0}, 1.0), MilpError);
  }
}

TEST_CASE("adam steps") {
  EsConfig config;
  config.learning_rate = 0.05;
  SUBCASE("zero gradient is a fixed point") {
    std::vector<double> theta = {1.0, -2.0};
    AdamState moments;
    adam_step(theta, {0.0, 0.0}, moments, config);
    CHECK(theta == std::vector<double>{1.0, -2.0});
  }
  SUBCASE("first step is a normalized ascent step") {
    std::vector<double> theta = {0.0, 0.0};
    AdamState moments;
    const std::vector<double> g = {2.0, -0.5};
    adam_step(theta, g, moments, config);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(theta[j] ==
            doctest::Approx(config.learning_rate * g[j] / (std::abs(g[j]) + config.adam_eps))
                .epsilon(1e-12));
  }
  SUBCASE("moments follow the recurrences") {
    std::vector<double> theta = {0.3};
    AdamState moments;
    double m = 0.0, v = 0.0, ref = 0.3;
    const std::vector<double> grads = {1.5, -0.7, 0.2};
    for (std::size_t step = 0; step < grads.size(); ++step) {
      adam_step(theta, {grads[step]}, moments, config);
      m = config.beta1 * m + (1 - config.beta1) * grads[step];
      v = config.beta2 * v + (1 - config.beta2) * grads[step] * grads[step];
      const double mh = m / (1 - std::pow(config.beta1, static_cast<double>(step + 1)));
      const double vh = v / (1 - std::pow(config.beta2, static_cast<double>(step + 1)));
      ref += config.learning_rate * mh / (std::sqrt(vh) + config.adam_eps);
      CHECK(theta[0] == doctest::Approx(ref).epsilon(1e-12));
      CHECK(moments.m[0] == doctest::Approx(m).epsilon(1e-12));
      CHECK(moments.v[0] == doctest::Approx(v).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero iterations return the initial parameters with empty history") {
  EsConfig config;
  config.iterations = 0;
  config.seed = 3;
  const std::vector<double> init = {1.0, 2.0, 3.0};
  const auto evaluate = [](const std::vector<std::vector<double>>& thetas) {
    std::vector<double> p;
    for (const auto& t : thetas) {
      double acc = 0.0;
      for (double v : t) acc += v * v;
      p.push_back(acc);
    }
    return p;
  };
  const auto result = run_es(config, evaluate, init);
  CHECK(result.best_theta == init);
  CHECK(result.history.empty());
  CHECK(result.best_iteration == 0);
}

TEST_CASE("history length equals the iteration count") {
  EsConfig config;
  config.iterations = 7;
  config.perturbations = 4;
  const auto evaluate = [](const std::vector<std::vector<double>>& thetas) {
    std::vector<double> p;
    for (const auto& t : thetas) p.push_back(t[0] * t[0]);
    return p;
  };
  const auto result = run_es(config, evaluate, {2.0});
  CHECK(result.history.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(result.history[i].iteration == i + 1);
}

TEST_CASE("surrogate quadratic converges under the pinned hyperparameters") {
  const std::size_t dim = 10;
  EsConfig config;
  config.perturbations = 32;
  config.sigma = 0.1;
  config.learning_rate = 0.05;
  config.iterations = 500;
  config.seed = 2024;

  Rng rng(912);
  std::vector<double> target(dim);
  for (double& v : target) v = rng.normal();

  const auto evaluate = [&](const std::vector<std::vector<double>>& thetas) {
    std::vector<double> p;
    p.reserve(thetas.size());
    for (const auto& t : thetas) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc += (t[j] - target[j]) * (t[j] - target[j]);
      p.push_back(acc);
    }
    return p;
  };

  const auto result = run_es(config, evaluate, std::vector<double>(dim, 0.0));
  CHECK(norm_diff(result.best_theta, target) < 0.1);
  CHECK(result.best_performance < result.initial_performance);
}

TEST_CASE("candidate evaluation order does not change the outcome") {
  EsConfig config;
  config.iterations = 5;
  config.perturbations = 8;
  config.seed = 66;

  const auto objective = [](const std::vector<double>& t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) acc += (t[j] - 1.0) * (t[j] - 1.0) * (1.0 + j);
    return acc;
  };
  const BatchEvaluator forward = [&](const std::vector<std::vector<double>>& thetas) {
    std::vector<double> p(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) p[i] = objective(thetas[i]);
    return p;
  };
  const BatchEvaluator reversed = [&](const std::vector<std::vector<double>>& thetas) {
    std::vector<double> p(thetas.size());
    for (std::size_t i = thetas.size(); i-- > 0;) p[i] = objective(thetas[i]);
    return p;
  };

  const auto a = run_es(config, forward, std::vector<double>(4, 0.0));
  const auto b = run_es(config, reversed, std::vector<double>(4, 0.0));
  REQUIRE(a.best_theta.size() == b.best_theta.size());
  CHECK(std::memcmp(a.best_theta.data(), b.best_theta.data(),
                    a.best_theta.size() * sizeof(double)) == 0);
  CHECK(a.best_performance == b.best_performance);
}

TEST_CASE("es config validation") {
  EsConfig config;
  config.perturbations = 1;
  CHECK_THROWS_AS(config.validate(3), MilpError);
  config.perturbations = 5;
  config.mirrored = true;
  CHECK_THROWS_AS(config.validate(3), MilpError);
  config.perturbations = 4;
  config.sigma = 0.0;
  CHECK_THROWS_AS(config.validate(3), MilpError);
}

TEST_CASE("candidate evaluation on instances") {
  const auto inst = cutstop::gen_multi_knapsack(6, 2, 9002);
  std::vector<const MilpInstance*> batch = {&inst};
  SolveConfig config;
  config.node_limit = 80;
  config.seed = 5;
  HygroConfig net;

  SUBCASE("same parameters give identical logical metrics") {
    Rng rng(3);
    const auto params = HygroParams::random(net, rng, 1.0);
    const double a = evaluate_candidate(params, batch, config, EsConfig::Metric::LogicalRounds, 1e6);
    const double b = evaluate_candidate(params, batch, config, EsConfig::Metric::LogicalRounds, 1e6);
    CHECK(a == b);
  }

  SUBCASE("stall budgets change the metric on a cuts-sensitive instance") {
    // drive the head bias to the extremes: action 0 vs action 29 at the root
    auto stop_now = HygroParams::zeros(net);
    stop_now.theta.back() = -10.0;
    auto cut_long = HygroParams::zeros(net);
    cut_long.theta.back() = 10.0;
    const double p_stop =
        evaluate_candidate(stop_now, batch, config, EsConfig::Metric::LogicalRounds, 1e6);
    const double p_long =
        evaluate_candidate(cut_long, batch, config, EsConfig::Metric::LogicalRounds, 1e6);
    CHECK(p_stop != p_long);
  }

  SUBCASE("solver failures count as the penalty") {
    SolveConfig broken = config;
    broken.tolerances.max_simplex_iterations = 1;  // forces an engine error
    const auto params = HygroParams::zeros(net);
    const double p =
        evaluate_candidate(params, batch, broken, EsConfig::Metric::LogicalRounds, 123.5);
    CHECK(p == 123.5);
  }
}
