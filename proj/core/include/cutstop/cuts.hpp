#pragma once

#include <cstdint>
#include <vector>

#include "cutstop/milp.hpp"
#include "cutstop/simplex.hpp"

namespace cutstop {

// A cutting plane sum_j coeffs_j x_j <= rhs over the structural variables,
// valid for every integer-feasible point of the base instance.
struct Cut {
  SparseRow row;
  int origin_row = -1;    // tableau row it was separated from
  int origin_round = 0;   // cut round at the separating node
  double norm = 0.0;      // Euclidean norm of the coefficients, cached

  std::uint64_t normalized_hash() const;
};

// Node-local LP: the base instance plus locally added cuts, with bounds
// possibly tightened by branching.
struct NodeLp {
  const MilpInstance* base = nullptr;
  std::vector<Cut> cuts;
  std::vector<double> lower;
  std::vector<double> upper;

  explicit NodeLp(const MilpInstance& inst)
      : base(&inst), lower(inst.lower), upper(inst.upper) {}

  int num_rows() const { return base->num_rows() + static_cast<int>(cuts.size()); }
  const SparseRow& row(int i) const {
    const int nb = base->num_rows();
    return i < nb ? base->rows[i] : cuts[i - nb].row;
  }
  bool is_cut_row(int i) const { return i >= base->num_rows(); }

  LpProblem to_lp() const;
};

// Normalized violation of the cut at a point: (coeffs.x - rhs) / norm.
// Positive iff the cut separates the point.
double cut_efficacy(const Cut& cut, const std::vector<double>& x);

// Gomory mixed-integer cuts from the fractional basic integer rows of the
// optimal dictionary. Nonbasic structural variables are complemented
// against the *global* bounds of the base instance, so every returned cut
// is valid for all integer-feasible points of the instance, not only the
// node's subtree, at any node depth. Cuts not violated by the current LP
// point beyond tau_sep are dropped.
std::vector<Cut> separate_gmi(const LpSolution& sol, const NodeLp& node,
                              const SolverTolerances& tol, int round,
                              double tau_sep = 1e-4);

// Top `max_per_round` candidates by efficacy (ties by lower origin row),
// duplicates by normalized hash removed, efficacy must exceed tau_sep.
std::vector<Cut> select_cuts(const std::vector<Cut>& pool, const std::vector<double>& x,
                             int max_per_round, double tau_sep = 1e-4);

// Consecutive-stagnation counter: a round whose relative objective change
// is <= eps stagnates; any other round resets the counter. Near-zero
// previous objectives switch the test to absolute change.
struct StallState {
  double prev_objective = 0.0;
  int counter = 0;
  double eps = 1e-5;
};

void stagnation_update(StallState& state, double new_objective);

}  // namespace cutstop
