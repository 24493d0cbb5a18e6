#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cutstop {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class MilpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tolerances shared by the LP engine and the integrality tests.
struct SolverTolerances {
  double feasibility = 1e-7;  // row feasibility
  double integrality = 1e-6;  // |x_j - round(x_j)| threshold
  double objective = 1e-8;
  double pivot = 1e-9;
  int max_simplex_iterations = 50000;

  void validate() const;
};

// One row stored sparsely with strictly increasing column indices.
struct SparseRow {
  std::vector<int> index;
  std::vector<double> value;
  double rhs = 0.0;

  std::size_t size() const { return index.size(); }
  double dot(const std::vector<double>& x) const;
  // Activity minus rhs; positive means violated for a <= row.
  double violation(const std::vector<double>& x) const { return dot(x) - rhs; }
};

enum class RowSense { LessEqual, GreaterEqual, Equal };

// A mixed-integer linear program in canonical form:
//   minimize c'x  subject to  Ax <= b,  l <= x <= u,  x_j integer for j in I.
// Maximize inputs and >=/= rows are converted on ingestion.
struct MilpInstance {
  std::string name;
  std::vector<double> objective;
  std::vector<SparseRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::uint8_t> is_integer;  // one flag per variable
  std::vector<int> integer_set;          // sorted indices of integer variables
  bool negated_from_max = false;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  std::size_t num_nonzeros() const;

  // Objective value in the sense the instance was stated in.
  double original_objective(double canonical) const {
    return negated_from_max ? -canonical : canonical;
  }
};

// Validates and canonicalizes. `senses` may be empty (all rows <=).
// Throws MilpError on dimension mismatch, invalid bounds, unbounded
// integer variables, or non-finite coefficients.
MilpInstance build_instance(std::vector<double> objective,
                            std::vector<SparseRow> rows,
                            std::vector<RowSense> senses,
                            std::vector<int> integer_set,
                            std::vector<std::pair<double, double>> bounds,
                            bool maximize = false,
                            std::string name = {});

// True iff x satisfies all rows, bounds, and integrality within tolerances.
bool check_feasible(const MilpInstance& inst, const std::vector<double>& x,
                    const SolverTolerances& tol);

struct BruteForceResult {
  bool feasible = false;
  double objective = kInf;
  std::vector<double> x;
};

// Exact optimum by full enumeration over the integer lattice of the bounds
// box. Requires every variable integer with finite bounds. Ties are broken
// by the lexicographically smallest solution vector.
// Throws MilpError when a continuous variable is present or the lattice
// exceeds `enumeration_cap`.
BruteForceResult brute_force_opt(const MilpInstance& inst,
                                 std::uint64_t enumeration_cap = std::uint64_t{1} << 20);

}  // namespace cutstop
