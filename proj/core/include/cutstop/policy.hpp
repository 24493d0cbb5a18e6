#pragma once

#include <limits>
#include <memory>
#include <string>
#include <string_view>

#include "cutstop/cuts.hpp"
#include "cutstop/hygro.hpp"
#include "cutstop/rng.hpp"

namespace cutstop {

inline constexpr int kUnlimited = std::numeric_limits<int>::max();

// Per-node budget produced by a stopping policy: the cut loop may run while
// stall_counter <= max_stall, rounds < max_rounds and cuts < max_cuts.
struct NodeBudget {
  int max_stall = kUnlimited;
  int max_rounds = kUnlimited;
  int max_cuts = kUnlimited;
  double stall_eps = 1e-5;
};

struct NodeContext {
  int node_id = 0;
  int depth = 0;
  const NodeLp* node_lp = nullptr;
  const LpSolution* lp = nullptr;
  double primal_bound = kInf;
  double dual_bound = -kInf;
  int hard_round_cap = 200;
};

// Loop state consulted before every round; rounds_executed counts the
// rounds already run at this node (0 before the first).
struct RoundContext {
  int depth = 0;
  int rounds_executed = 0;
  int cuts_added_total = 0;
  int stall_counter = 0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  int rounds_since_improvement = 0;
};

enum class PolicyKind { Default, NoCuts, Always, Fcn, Fcr, Immediate, RandomI, RandomII, Hygro };

struct PolicyParams {
  int srd_max_stall = 5;          // Default/SRD stall budget
  double eps = 1e-5;              // stagnation threshold
  int fcn_max_cuts = 200;
  int fcr_max_rounds = 100;
  double random_stop_prob = 0.005;  // Random I per-round stop probability
  int random_stall_range = 30;      // Random II draws max_stall from [0, range)
  std::shared_ptr<const HygroParams> hygro;
};

class StopPolicy {
 public:
  virtual ~StopPolicy() = default;

  // Called once when the solver starts cutting at a node.
  virtual NodeBudget on_node_enter(const NodeContext& node) = 0;

  // Pure function of (budget, ctx, rng stream); false stops the loop.
  virtual bool continue_cutting(const NodeBudget& budget, const RoundContext& ctx) = 0;

  virtual PolicyKind kind() const = 0;
  virtual std::string_view name() const = 0;
};

std::unique_ptr<StopPolicy> make_policy(PolicyKind kind, const PolicyParams& params,
                                        std::uint64_t seed);

// Parses "kind[:param=value,...]" specs, e.g. "fcr:t=100", "srd:s=5,eps=1e-6",
// "hygro:model=ckpt.bin". Throws MilpError on unknown kinds or parameters.
std::unique_ptr<StopPolicy> make_policy(const std::string& spec, std::uint64_t seed);

}  // namespace cutstop
