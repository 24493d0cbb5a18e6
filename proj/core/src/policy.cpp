#include "cutstop/policy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cutstop {

namespace {

bool budget_allows(const NodeBudget& b, const RoundContext& c) {
  if (c.stall_counter > b.max_stall) return false;
  if (c.rounds_executed >= b.max_rounds) return false;
  if (c.cuts_added_total >= b.max_cuts) return false;
  return true;
}

class BudgetPolicy : public StopPolicy {
 public:
  BudgetPolicy(PolicyKind kind, std::string name, NodeBudget budget)
      : kind_(kind), name_(std::move(name)), budget_(budget) {}

  NodeBudget on_node_enter(const NodeContext&) override { return budget_; }

  bool continue_cutting(const NodeBudget& budget, const RoundContext& ctx) override {
    return budget_allows(budget, ctx);
  }

  PolicyKind kind() const override { return kind_; }
  std::string_view name() const override { return name_; }

 private:
  PolicyKind kind_;
  std::string name_;
  NodeBudget budget_;
};

class RandomStopPolicy : public StopPolicy {
 public:
  RandomStopPolicy(double stop_prob, double eps, std::uint64_t seed)
      : stop_prob_(stop_prob), rng_(seed) {
    budget_.stall_eps = eps;
  }

  NodeBudget on_node_enter(const NodeContext&) override { return budget_; }

  bool continue_cutting(const NodeBudget& budget, const RoundContext& ctx) override {
    // always consume exactly one draw so streams stay aligned across runs
    const bool fired = rng_.uniform() < stop_prob_;
    return budget_allows(budget, ctx) && !fired;
  }

  PolicyKind kind() const override { return PolicyKind::RandomI; }
  std::string_view name() const override { return "random1"; }

 private:
  double stop_prob_;
  NodeBudget budget_;
  Rng rng_;
};

class RandomStallPolicy : public StopPolicy {
 public:
  RandomStallPolicy(int range, double eps, std::uint64_t seed) : range_(range), rng_(seed) {
    eps_ = eps;
  }

  NodeBudget on_node_enter(const NodeContext&) override {
    NodeBudget b;
    b.max_stall = static_cast<int>(rng_.uniform_int(0, range_ - 1));  // fixed per node
    b.stall_eps = eps_;
    return b;
  }

  bool continue_cutting(const NodeBudget& budget, const RoundContext& ctx) override {
    return budget_allows(budget, ctx);
  }

  PolicyKind kind() const override { return PolicyKind::RandomII; }
  std::string_view name() const override { return "random2"; }

 private:
  int range_;
  double eps_;
  Rng rng_;
};

class HygroPolicy : public StopPolicy {
 public:
  HygroPolicy(std::shared_ptr<const HygroParams> params, double eps)
      : params_(std::move(params)), eps_(eps) {
    if (!params_) throw MilpError("hygro policy requires model parameters");
  }

  NodeBudget on_node_enter(const NodeContext& node) override {
    if (!node.node_lp || !node.lp)
      throw MilpError("hygro policy needs the node LP to encode its state");
    EncodeContext ec;
    ec.depth = node.depth;
    ec.rounds_executed = 0;
    ec.stall_counter = 0;
    ec.primal_bound = node.primal_bound;
    ec.dual_bound = node.dual_bound;
    ec.hard_round_cap = node.hard_round_cap;
    ec.action_space = params_->config.action_space;
    const BipartiteState state = encode_state(*node.node_lp, *node.lp, ec);
    const RatioOutput out = hygro_forward(state, *params_, node.depth == 0);
    NodeBudget b;
    b.max_stall = out.action;
    b.stall_eps = eps_;
    return b;
  }

  bool continue_cutting(const NodeBudget& budget, const RoundContext& ctx) override {
    return budget_allows(budget, ctx);
  }

  PolicyKind kind() const override { return PolicyKind::Hygro; }
  std::string_view name() const override { return "hygro"; }

 private:
  std::shared_ptr<const HygroParams> params_;
  double eps_;
};

NodeBudget srd_budget(int max_stall, double eps) {
  NodeBudget b;
  b.max_stall = max_stall;
  b.stall_eps = eps;
  return b;
}

}  // namespace

std::unique_ptr<StopPolicy> make_policy(PolicyKind kind, const PolicyParams& params,
                                        std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::Default:
      return std::make_unique<BudgetPolicy>(PolicyKind::Default, "default",
                                            srd_budget(params.srd_max_stall, params.eps));
    case PolicyKind::NoCuts: {
      NodeBudget b;
      b.max_rounds = 0;
      return std::make_unique<BudgetPolicy>(PolicyKind::NoCuts, "nocuts", b);
    }
    case PolicyKind::Always:
      return std::make_unique<BudgetPolicy>(PolicyKind::Always, "always", NodeBudget{});
    case PolicyKind::Fcn: {
      if (params.fcn_max_cuts < 0) throw MilpError("fcn cut budget must be >= 0");
      NodeBudget b;
      b.max_cuts = params.fcn_max_cuts;
      b.stall_eps = params.eps;
      return std::make_unique<BudgetPolicy>(PolicyKind::Fcn, "fcn", b);
    }
    case PolicyKind::Fcr: {
      if (params.fcr_max_rounds < 0) throw MilpError("fcr round budget must be >= 0");
      NodeBudget b;
      b.max_rounds = params.fcr_max_rounds;
      b.stall_eps = params.eps;
      return std::make_unique<BudgetPolicy>(PolicyKind::Fcr, "fcr", b);
    }
    case PolicyKind::Immediate:
      return std::make_unique<BudgetPolicy>(PolicyKind::Immediate, "immediate",
                                            srd_budget(0, 1e-5));
    case PolicyKind::RandomI:
      if (params.random_stop_prob < 0.0 || params.random_stop_prob > 1.0)
        throw MilpError("random1 stop probability must be in [0, 1]");
      return std::make_unique<RandomStopPolicy>(params.random_stop_prob, params.eps, seed);
    case PolicyKind::RandomII:
      if (params.random_stall_range < 1) throw MilpError("random2 range must be >= 1");
      return std::make_unique<RandomStallPolicy>(params.random_stall_range, params.eps, seed);
    case PolicyKind::Hygro:
      return std::make_unique<HygroPolicy>(params.hygro, params.eps);
  }
  throw MilpError("unknown policy kind");
}

std::unique_ptr<StopPolicy> make_policy(const std::string& spec, std::uint64_t seed) {
  std::string kind_str = spec;
  std::string param_str;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    kind_str = spec.substr(0, colon);
    param_str = spec.substr(colon + 1);
  }
  std::transform(kind_str.begin(), kind_str.end(), kind_str.begin(),
                 [](unsigned char c) { return std::tolower(c); });

  std::map<std::string, std::string> kv;
  std::stringstream ss(param_str);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw MilpError("policy parameter '" + item + "' needs key=value");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto take = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) return {};
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  PolicyParams params;
  PolicyKind kind;
  if (kind_str == "default" || kind_str == "srd") {
    kind = PolicyKind::Default;
    if (auto v = take("s"); !v.empty()) params.srd_max_stall = std::stoi(v);
    if (auto v = take("eps"); !v.empty()) params.eps = std::stod(v);
  } else if (kind_str == "nocuts") {
    kind = PolicyKind::NoCuts;
  } else if (kind_str == "always") {
    kind = PolicyKind::Always;
  } else if (kind_str == "fcn") {
    kind = PolicyKind::Fcn;
    if (auto v = take("k"); !v.empty()) params.fcn_max_cuts = std::stoi(v);
  } else if (kind_str == "fcr") {
    kind = PolicyKind::Fcr;
    if (auto v = take("t"); !v.empty()) params.fcr_max_rounds = std::stoi(v);
  } else if (kind_str == "immediate") {
    kind = PolicyKind::Immediate;
  } else if (kind_str == "random1" || kind_str == "randomi") {
    kind = PolicyKind::RandomI;
    if (auto v = take("p"); !v.empty()) params.random_stop_prob = std::stod(v);
  } else if (kind_str == "random2" || kind_str == "randomii") {
    kind = PolicyKind::RandomII;
    if (auto v = take("range"); !v.empty()) params.random_stall_range = std::stoi(v);
  } else if (kind_str == "hygro") {
    kind = PolicyKind::Hygro;
    if (auto v = take("eps"); !v.empty()) params.eps = std::stod(v);
    const std::string model = take("model");
    if (model.empty()) throw MilpError("hygro policy needs model=<checkpoint path>");
    params.hygro = std::make_shared<HygroParams>(load_checkpoint(model));
  } else {
    throw MilpError("unknown policy '" + kind_str + "'");
  }
  if (!kv.empty()) throw MilpError("unknown parameter '" + kv.begin()->first + "' for policy " + kind_str);
  return make_policy(kind, params, seed);
}

}  // namespace cutstop
