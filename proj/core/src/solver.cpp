#include "cutstop/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <queue>
#include <tuple>

namespace cutstop {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

BranchDecision branch_decision(const std::vector<double>& x,
                               const std::vector<std::uint8_t>& is_integer,
                               double integrality_tol) {
  int best = -1;
  double best_frac = integrality_tol;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!is_integer[j]) continue;
    const double frac = std::abs(x[j] - std::round(x[j]));
    if (frac > best_frac) {
      best_frac = frac;
      best = static_cast<int>(j);
    }
  }
  if (best < 0) throw MilpError("branch called with an integral solution");
  BranchDecision d;
  d.variable = best;
  d.floor_bound = std::floor(x[best]);
  d.ceil_bound = d.floor_bound + 1.0;
  return d;
}

void record_bounds(SolveStats& stats, double wall_now, double logical_now,
                   double primal, double dual) {
  if (!stats.events.empty()) {
    const BoundEvent& last = stats.events.back();
    if (wall_now < last.wall - 1e-12 || logical_now < last.logical)
      throw MilpError("bound event time went backwards");
    if (primal > last.primal) {  // primal must not regress upward
      if (primal - last.primal > 1e-9) ++stats.clip_warnings;
      primal = last.primal;
    }
    if (dual < last.dual) {
      if (last.dual - dual > 1e-9) ++stats.clip_warnings;
      dual = last.dual;
    }
  }
  stats.events.push_back(BoundEvent{wall_now, logical_now, primal, dual});
}

namespace {

double bound_gap(double primal, double dual) {
  if (!std::isfinite(primal) || !std::isfinite(dual)) return 1.0;
  if (primal * dual < 0.0 && primal != 0.0 && dual != 0.0) return 1.0;
  const double gap = std::abs(primal - dual) / std::max({std::abs(primal), std::abs(dual), 1e-10});
  return std::clamp(gap, 0.0, 1.0);
}

}  // namespace

double compute_pdi(const std::vector<BoundEvent>& events, double end_time, bool logical) {
  if (events.empty()) throw MilpError("pdi needs at least one bound event");
  const auto clock = [&](const BoundEvent& e) { return logical ? e.logical : e.wall; };
  if (end_time < clock(events.back()) - 1e-12)
    throw MilpError("pdi end time precedes the last event");
  double acc = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double t0 = clock(events[i]);
    const double t1 = i + 1 < events.size() ? clock(events[i + 1]) : end_time;
    if (t1 <= t0) continue;
    acc += bound_gap(events[i].primal, events[i].dual) * (t1 - t0);
  }
  return acc;
}

namespace {

// Cuts are strictly node-local: every node separates against the base
// instance rows only, so LPs stay small down the tree. A child still
// inherits the parent's final (cut-strengthened) bound value, which remains
// valid for its subtree.
struct TreeNode {
  int id = 0;
  int parent = -1;
  int depth = 0;
  double bound = -kInf;
  std::vector<double> lower;
  std::vector<double> upper;
};

class BranchAndCut {
 public:
  BranchAndCut(const MilpInstance& inst, StopPolicy& policy, const SolveConfig& config)
      : inst_(inst), policy_(policy), config_(config), start_(Clock::now()) {
    config_.tolerances.validate();
    if (!(config_.time_limit_seconds > 0)) throw MilpError("time limit must be positive");
    PolicyParams fp;
    fp.srd_max_stall = 1;
    fallback_ = make_policy(
        config_.fallback == FallbackPolicy::NoCuts ? PolicyKind::NoCuts : PolicyKind::Default,
        fp, config_.seed ^ 0x5bd1e995u);
  }

  SolveStats run() {
    record_bounds(stats_, 0.0, 0.0, kInf, -kInf);

    TreeNode root;
    root.id = next_id_++;
    root.lower = inst_.lower;
    root.upper = inst_.upper;
    push(std::move(root));

    SolveStatus status = SolveStatus::Optimal;
    while (!queue_.empty()) {
      // limits are honored between nodes; the root always gets processed so
      // a finished run carries at least one bound observation
      if (stats_.nodes_processed > 0) {
        if (elapsed() > config_.time_limit_seconds) {
          status = SolveStatus::TimeLimit;
          break;
        }
        if (stats_.nodes_processed >= config_.node_limit) {
          status = SolveStatus::NodeLimit;
          break;
        }
      }
      const auto [bound, seq, idx] = queue_.top();
      queue_.pop();
      if (bound >= incumbent_ - 1e-9) continue;  // pruned by bound
      process(nodes_[idx]);
      nodes_[idx].lower.clear();
      nodes_[idx].lower.shrink_to_fit();
      nodes_[idx].upper.clear();
      nodes_[idx].upper.shrink_to_fit();
    }

    if (queue_.empty() && status == SolveStatus::Optimal && !std::isfinite(incumbent_))
      status = SolveStatus::Infeasible;

    stats_.status = status;
    stats_.best_objective = incumbent_;
    stats_.best_x = best_x_;
    stats_.dual_bound = queue_.empty() ? incumbent_ : global_dual(kInf);
    stats_.wall_time_seconds = elapsed();
    stats_.logical_time = static_cast<double>(stats_.lp_solves);
    record_bounds(stats_, stats_.wall_time_seconds, stats_.logical_time, incumbent_,
                  stats_.dual_bound);
    stats_.pdi = compute_pdi(stats_.events,
                             config_.logical_clock_pdi ? stats_.logical_time
                                                       : stats_.wall_time_seconds,
                             config_.logical_clock_pdi);
    return std::move(stats_);
  }

 private:
  using Clock = std::chrono::steady_clock;

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  void push(TreeNode node) {
    const int idx = static_cast<int>(nodes_.size());
    queue_.emplace(node.bound, next_seq_++, idx);
    nodes_.push_back(std::move(node));
  }

  double global_dual(double candidate) const {
    double d = candidate;
    if (!queue_.empty()) d = std::min(d, std::get<0>(queue_.top()));
    return std::min(d, incumbent_);
  }

  // `bound_floor` is the node's inherited bound: a fresh node LP without the
  // ancestors' cuts may sit below it, but the subtree bound never does.
  void note_lp(const LpSolution& lp, double bound_floor) {
    ++stats_.lp_solves;
    if (lp.status == LpStatus::Optimal)
      record_bounds(stats_, elapsed(), static_cast<double>(stats_.lp_solves), incumbent_,
                    global_dual(std::max(lp.objective, bound_floor)));
  }

  bool integral(const LpSolution& lp) const {
    for (int j : inst_.integer_set)
      if (std::abs(lp.x[j] - std::round(lp.x[j])) > config_.tolerances.integrality)
        return false;
    return true;
  }

  void try_incumbent(const LpSolution& lp) {
    std::vector<double> x = lp.x;
    for (int j : inst_.integer_set) x[j] = std::round(x[j]);
    double obj;
    if (check_feasible(inst_, x, config_.tolerances)) {
      obj = 0.0;
      for (int j = 0; j < inst_.num_vars(); ++j) obj += inst_.objective[j] * x[j];
    } else if (check_feasible(inst_, lp.x, config_.tolerances)) {
      x = lp.x;  // rounding crossed a tight row; keep the raw point
      obj = lp.objective;
    } else {
      return;
    }
    if (obj < incumbent_ - 1e-12) {
      incumbent_ = obj;
      best_x_ = std::move(x);
      record_bounds(stats_, elapsed(), static_cast<double>(stats_.lp_solves), incumbent_,
                    global_dual(kInf));
    }
  }

  void process(const TreeNode& node) {
    NodeLp nlp(inst_);
    nlp.lower = node.lower;
    nlp.upper = node.upper;

    LpSolution lp;
    try {
      lp = lp_solve(nlp.to_lp(), config_.tolerances);
    } catch (const MilpError& e) {
      throw MilpError("node " + std::to_string(node.id) + ": " + e.what());
    }
    ++stats_.nodes_processed;
    note_lp(lp, node.bound);

    if (lp.status == LpStatus::Unbounded)
      throw MilpError("node " + std::to_string(node.id) + ": LP unbounded");
    if (lp.status == LpStatus::IterationLimit)
      throw MilpError("node " + std::to_string(node.id) + ": simplex iteration limit");
    if (lp.status == LpStatus::Infeasible) {
      trace(node, lp.objective, 0, nullptr);
      return;
    }
    // the parent's cut-strengthened bound stays valid for this subtree
    double node_bound = std::max(lp.objective, node.bound);
    if (node_bound >= incumbent_ - 1e-9) return;
    if (integral(lp)) {
      try_incumbent(lp);
      trace(node, lp.objective, 0, nullptr);
      return;
    }

    StopPolicy& pol = node.depth <= config_.policy_depth_limit ? policy_ : *fallback_;
    NodeContext nctx;
    nctx.node_id = node.id;
    nctx.depth = node.depth;
    nctx.node_lp = &nlp;
    nctx.lp = &lp;
    nctx.primal_bound = incumbent_;
    nctx.dual_bound = lp.objective;
    nctx.hard_round_cap = config_.hard_round_cap;
    const NodeBudget budget = pol.on_node_enter(nctx);

    CutLoopOptions opts;
    opts.max_per_round = config_.max_cuts_per_round;
    opts.hard_round_cap = config_.hard_round_cap;
    opts.tau_sep = config_.tau_sep;
    opts.trace = config_.cut_trace;
    CutLoopResult loop;
    try {
      loop = run_cut_loop(nlp, lp, node.depth, pol, budget, config_.tolerances, opts,
                          [this, &node](const LpSolution& s) { note_lp(s, node.bound); });
    } catch (const MilpError& e) {
      throw MilpError("node " + std::to_string(node.id) + ": " + e.what());
    }
    stats_.total_cut_rounds += loop.rounds_executed;
    stats_.total_cuts_added += loop.cuts_added;
    trace(node, loop.final_lp.status == LpStatus::Optimal ? loop.final_lp.objective
                                                          : lp.objective,
          loop.rounds_executed, &budget);
    if (config_.cut_audit)
      config_.cut_audit->insert(config_.cut_audit->end(), nlp.cuts.begin(), nlp.cuts.end());
    if (config_.node_audit)
      config_.node_audit->push_back(NodeAudit{node.id, node.depth, loop.rounds_executed,
                                              loop.cuts_added, budget,
                                              loop.objective_by_round});

    const LpSolution& final_lp = loop.final_lp;
    if (final_lp.status == LpStatus::Infeasible) return;
    node_bound = std::max(node_bound, final_lp.objective);
    if (node_bound >= incumbent_ - 1e-9) return;
    if (integral(final_lp)) {
      try_incumbent(final_lp);
      return;
    }

    const BranchDecision bd =
        branch_decision(final_lp.x, inst_.is_integer, config_.tolerances.integrality);

    TreeNode low;
    low.id = next_id_++;
    low.parent = node.id;
    low.depth = node.depth + 1;
    low.bound = node_bound;
    low.lower = nlp.lower;
    low.upper = nlp.upper;
    low.upper[bd.variable] = bd.floor_bound;

    TreeNode high;
    high.id = next_id_++;
    high.parent = node.id;
    high.depth = node.depth + 1;
    high.bound = node_bound;
    high.lower = nlp.lower;
    high.upper = nlp.upper;
    high.lower[bd.variable] = bd.ceil_bound;

    push(std::move(low));
    push(std::move(high));
  }

  void trace(const TreeNode& node, double bound, int rounds, const NodeBudget* budget) {
    if (!config_.trace) return;
    (*config_.trace) << node.id << '\t' << node.depth << '\t' << bound << '\t' << rounds
                     << '\t';
    if (budget && budget->max_stall != kUnlimited)
      (*config_.trace) << budget->max_stall;
    else
      (*config_.trace) << '-';
    (*config_.trace) << '\n';
  }

  const MilpInstance& inst_;
  StopPolicy& policy_;
  SolveConfig config_;
  Clock::time_point start_;
  std::unique_ptr<StopPolicy> fallback_;
  SolveStats stats_;
  std::vector<TreeNode> nodes_;
  // min-heap over (bound, insertion sequence): best-first with FIFO ties
  std::priority_queue<std::tuple<double, long, int>, std::vector<std::tuple<double, long, int>>,
                      std::greater<>>
      queue_;
  long next_seq_ = 0;
  int next_id_ = 0;
  double incumbent_ = kInf;
  std::vector<double> best_x_;
};

}  // namespace

SolveStats solve(const MilpInstance& inst, StopPolicy& policy, const SolveConfig& config) {
  BranchAndCut driver(inst, policy, config);
  return driver.run();
}

}  // namespace cutstop
