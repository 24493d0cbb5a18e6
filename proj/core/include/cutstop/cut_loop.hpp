#pragma once

#include <functional>
#include <iosfwd>

#include "cutstop/cuts.hpp"
#include "cutstop/policy.hpp"

namespace cutstop {

enum class StopReason { PolicyStop, NoCuts, Integral, Infeasible, RoundCap };

std::string_view to_string(StopReason reason);

struct CutLoopResult {
  int rounds_executed = 0;
  int cuts_added = 0;
  StopReason stop_reason = StopReason::PolicyStop;
  LpSolution final_lp;
  std::vector<double> objective_by_round;  // dual bound after each round
  int final_stall_counter = 0;
};

struct CutLoopOptions {
  int max_per_round = 10;
  int hard_round_cap = 200;
  double tau_sep = 1e-4;
  std::ostream* trace = nullptr;  // per-round csv lines when set
};

// Repeats {separate, select, add rows, re-solve, stagnation update, consult
// policy} on the node LP until the policy stops, nothing separates, the LP
// turns integral or infeasible, or the hard round cap is reached. Cuts are
// appended to `node`; `after_resolve` fires after every LP re-solve (the
// solver uses it for its logical clock and bound events).
CutLoopResult run_cut_loop(NodeLp& node, const LpSolution& node_lp, int depth,
                           StopPolicy& policy, const NodeBudget& budget,
                           const SolverTolerances& tol, const CutLoopOptions& opts,
                           const std::function<void(const LpSolution&)>& after_resolve = {});

}  // namespace cutstop
