#include "cutstop/cut_loop.hpp"

#include <cmath>
#include <ostream>

namespace cutstop {

namespace {

bool lp_integral(const LpSolution& sol, const MilpInstance& base, double tol) {
  for (int j : base.integer_set)
    if (std::abs(sol.x[j] - std::round(sol.x[j])) > tol) return false;
  return true;
}

void trace_round(std::ostream* out, int round, std::size_t candidates, std::size_t selected,
                 double objective, int stall, std::string_view stop) {
  if (!out) return;
  (*out) << round << '\t' << candidates << '\t' << selected << '\t' << objective << '\t'
         << stall << '\t' << stop << '\n';
}

}  // namespace

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::PolicyStop: return "policy_stop";
    case StopReason::NoCuts: return "no_cuts";
    case StopReason::Integral: return "integral";
    case StopReason::Infeasible: return "infeasible";
    case StopReason::RoundCap: return "round_cap";
  }
  return "unknown";
}

CutLoopResult run_cut_loop(NodeLp& node, const LpSolution& node_lp, int depth,
                           StopPolicy& policy, const NodeBudget& budget,
                           const SolverTolerances& tol, const CutLoopOptions& opts,
                           const std::function<void(const LpSolution&)>& after_resolve) {
  CutLoopResult result;
  result.final_lp = node_lp;
  if (node_lp.status != LpStatus::Optimal)
    throw MilpError("cut loop requires an optimal node LP");

  StallState stall;
  stall.prev_objective = node_lp.objective;
  stall.eps = budget.stall_eps;

  double prev_objective = node_lp.objective;
  int rounds_since_improvement = 0;

  while (true) {
    if (budget.max_rounds == 0) {
      // a zero-round budget stops before the policy is ever consulted
      result.stop_reason = StopReason::RoundCap;
      break;
    }
    if (result.rounds_executed >= opts.hard_round_cap) {
      result.stop_reason = StopReason::RoundCap;
      break;
    }
    if (lp_integral(result.final_lp, *node.base, tol.integrality)) {
      result.stop_reason = StopReason::Integral;
      break;
    }

    RoundContext ctx;
    ctx.depth = depth;
    ctx.rounds_executed = result.rounds_executed;
    ctx.cuts_added_total = result.cuts_added;
    ctx.stall_counter = stall.counter;
    ctx.objective_before = prev_objective;
    ctx.objective_after = result.final_lp.objective;
    ctx.rounds_since_improvement = rounds_since_improvement;
    if (!policy.continue_cutting(budget, ctx)) {
      // an exhausted round budget reads as a round cap, any other policy
      // decision (stall, cut budget, random stop) as a plain policy stop
      result.stop_reason = ctx.rounds_executed >= budget.max_rounds ? StopReason::RoundCap
                                                                    : StopReason::PolicyStop;
      trace_round(opts.trace, result.rounds_executed, 0, 0, result.final_lp.objective,
                  stall.counter, to_string(result.stop_reason));
      break;
    }

    const int round = result.rounds_executed + 1;
    const std::vector<Cut> candidates =
        separate_gmi(result.final_lp, node, tol, round, opts.tau_sep);
    if (candidates.empty()) {
      result.stop_reason = StopReason::NoCuts;
      trace_round(opts.trace, round, 0, 0, result.final_lp.objective, stall.counter, "no_cuts");
      break;
    }
    // keep the per-round selection inside the policy's remaining cut budget
    int allow = opts.max_per_round;
    if (budget.max_cuts != kUnlimited)
      allow = std::min(allow, budget.max_cuts - result.cuts_added);
    std::vector<Cut> selected = select_cuts(candidates, result.final_lp.x, allow, opts.tau_sep);
    if (selected.empty()) {
      result.stop_reason = StopReason::NoCuts;
      trace_round(opts.trace, round, candidates.size(), 0, result.final_lp.objective,
                  stall.counter, "no_cuts");
      break;
    }

    for (auto& cut : selected) node.cuts.push_back(std::move(cut));
    LpSolution lp;
    try {
      lp = lp_solve(node.to_lp(), tol);
    } catch (const MilpError& e) {
      throw MilpError("cut round " + std::to_string(round) + ": " + e.what());
    }
    if (after_resolve) after_resolve(lp);

    result.rounds_executed = round;
    result.cuts_added += static_cast<int>(selected.size());

    if (lp.status == LpStatus::Infeasible) {
      result.final_lp = std::move(lp);
      result.stop_reason = StopReason::Infeasible;
      trace_round(opts.trace, round, candidates.size(), selected.size(), kInf, stall.counter,
                  "infeasible");
      break;
    }
    if (lp.status != LpStatus::Optimal)
      throw MilpError("cut round " + std::to_string(round) +
                      ": LP did not solve to optimality");

    prev_objective = result.final_lp.objective;
    result.final_lp = std::move(lp);
    result.objective_by_round.push_back(result.final_lp.objective);
    stagnation_update(stall, result.final_lp.objective);
    if (result.final_lp.objective > prev_objective + 1e-12)
      rounds_since_improvement = 0;
    else
      ++rounds_since_improvement;
    trace_round(opts.trace, round, candidates.size(), selected.size(),
                result.final_lp.objective, stall.counter, "");
  }

  result.final_stall_counter = stall.counter;
  return result;
}

}  // namespace cutstop
