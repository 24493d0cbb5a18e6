#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cutstop/cut_loop.hpp"
#include "cutstop/milp.hpp"
#include "cutstop/policy.hpp"

namespace cutstop {

enum class SolveStatus { Optimal, TimeLimit, NodeLimit, Infeasible };

std::string_view to_string(SolveStatus status);

// One bound observation. Both clocks are recorded: wall seconds and the
// logical clock (one tick per LP solve) used for reproducible PDI.
struct BoundEvent {
  double wall = 0.0;
  double logical = 0.0;
  double primal = kInf;
  double dual = -kInf;
};

struct SolveStats {
  SolveStatus status = SolveStatus::Infeasible;
  double best_objective = kInf;  // primal bound, canonical (minimize) sense
  std::vector<double> best_x;
  double dual_bound = -kInf;
  long nodes_processed = 0;
  long total_cut_rounds = 0;
  long total_cuts_added = 0;
  long lp_solves = 0;
  double wall_time_seconds = 0.0;
  double logical_time = 0.0;
  double pdi = 0.0;
  int clip_warnings = 0;
  std::vector<BoundEvent> events;

  bool has_incumbent() const { return best_objective < kInf; }
};

enum class FallbackPolicy { SrdOne, NoCuts };

// Per-node cut-loop record for auditing budget compliance and bound
// monotonicity from the outside.
struct NodeAudit {
  int node_id = 0;
  int depth = 0;
  int rounds = 0;
  int cuts_added = 0;
  NodeBudget budget;
  std::vector<double> objective_by_round;
};

struct SolveConfig {
  double time_limit_seconds = 300.0;
  long node_limit = std::numeric_limits<long>::max();
  // The active stopping policy decides at nodes with depth <= this; deeper
  // nodes use the fallback (0 = root only).
  int policy_depth_limit = 0;
  FallbackPolicy fallback = FallbackPolicy::SrdOne;
  std::uint64_t seed = 0;
  SolverTolerances tolerances;
  int max_cuts_per_round = 10;
  int hard_round_cap = 200;
  double tau_sep = 1e-4;
  bool logical_clock_pdi = true;  // deterministic PDI; CLI flips to wall time
  std::ostream* trace = nullptr;  // per-node trace lines
  std::ostream* cut_trace = nullptr;
  std::vector<Cut>* cut_audit = nullptr;        // every cut generated in the tree
  std::vector<NodeAudit>* node_audit = nullptr; // per-node loop records
};

struct BranchDecision {
  int variable = -1;
  double floor_bound = 0.0;  // child low: x_j <= floor_bound
  double ceil_bound = 0.0;   // child high: x_j >= ceil_bound
};

// Most-fractional branching, ties by lowest index. Throws when every
// integer variable is integral within the tolerance.
BranchDecision branch_decision(const std::vector<double>& x,
                               const std::vector<std::uint8_t>& is_integer,
                               double integrality_tol);

// Appends a bound event, enforcing non-decreasing times and monotone
// bounds; regressions beyond 1e-9 are clipped and counted.
void record_bounds(SolveStats& stats, double wall_now, double logical_now,
                   double primal, double dual);

// Step integral of the piecewise-constant normalized gap. gap = 1 without
// an incumbent or for opposite-sign bounds, else |p-d|/max(|p|,|d|,1e-10)
// clipped to [0,1]. `logical` selects which clock to integrate over.
double compute_pdi(const std::vector<BoundEvent>& events, double end_time,
                   bool logical = true);

// Best-first branch and cut under the given stopping policy.
SolveStats solve(const MilpInstance& inst, StopPolicy& policy, const SolveConfig& config);

}  // namespace cutstop
