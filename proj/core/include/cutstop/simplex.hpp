#pragma once

#include <cstdint>
#include <vector>

#include "cutstop/milp.hpp"

namespace cutstop {

// LP in computational form: min c'x s.t. Ax <= b, l <= x <= u.
// Internally one slack column is appended per row (Ax + s = b, s >= 0).
struct LpProblem {
  std::vector<double> objective;
  std::vector<SparseRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

enum class ColStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };

class SingularBasisError : public MilpError {
 public:
  explicit SingularBasisError(int row)
      : MilpError("numerically singular basis at row " + std::to_string(row)), row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

// Solution of a bounded-variable LP. Columns are structural variables
// followed by one slack per row. The final simplex dictionary is kept
// (status Optimal only) so that tableau rows of fractional basic variables
// can be read back for cut separation; it is recomputed from a fresh
// factorization of the optimal basis, not from the iterated tableau.
struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;          // structural values
  double objective = kInf;
  std::vector<double> col_value;  // structural + slack values
  std::vector<ColStatus> col_status;
  std::vector<int> basis;         // basic column of each row
  std::vector<double> dual;       // one multiplier per row
  std::vector<double> reduced_cost;
  int iterations = 0;
  int num_structural = 0;

  std::vector<double> tableau;  // row-major m x (num columns + 1)
  int tableau_cols = 0;

  bool has_tableau() const { return tableau_cols > 0; }
  const double* tableau_row(int i) const { return tableau.data() + static_cast<std::size_t>(i) * tableau_cols; }
  double tableau_rhs(int i) const { return tableau_row(i)[tableau_cols - 1]; }
};

// Primal simplex with bounded variables (nonbasic at lower or upper bound,
// bound flips in the ratio test). Deterministic: Dantzig pricing with
// lowest-index ties, switching to Bland's rule after 2*(rows+cols)
// iterations without objective improvement. `warm_status` optionally seeds
// the initial nonbasic bound assignment; slacks start basic either way.
LpSolution lp_solve(const LpProblem& lp, const SolverTolerances& tol,
                    const std::vector<ColStatus>* warm_status = nullptr);

}  // namespace cutstop
