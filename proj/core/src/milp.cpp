#include "cutstop/milp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cutstop {

void SolverTolerances::validate() const {
  if (!(feasibility > 0) || !(integrality > 0) || !(objective > 0) || !(pivot > 0))
    throw MilpError("tolerances must be strictly positive");
  if (!(integrality < 0.5)) throw MilpError("integrality tolerance must be < 0.5");
  if (max_simplex_iterations <= 0) throw MilpError("iteration limit must be positive");
}

double SparseRow::dot(const std::vector<double>& x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < index.size(); ++k) acc += value[k] * x[index[k]];
  return acc;
}

std::size_t MilpInstance::num_nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  return nnz;
}

namespace {

SparseRow normalize_row(const SparseRow& in, int m_vars) {
  std::vector<std::pair<int, double>> entries;
  entries.reserve(in.index.size());
  for (std::size_t k = 0; k < in.index.size(); ++k) {
    const int j = in.index[k];
    const double v = in.value[k];
    if (j < 0 || j >= m_vars)
      throw MilpError("row references column " + std::to_string(j) + " out of range");
    if (std::isnan(v) || std::isinf(v)) throw MilpError("non-finite coefficient in row");
    if (v == 0.0) continue;  // no explicit zeros
    entries.emplace_back(j, v);
  }
  std::sort(entries.begin(), entries.end());
  SparseRow out;
  out.rhs = in.rhs;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k > 0 && entries[k].first == entries[k - 1].first)
      throw MilpError("duplicate column in row");
    out.index.push_back(entries[k].first);
    out.value.push_back(entries[k].second);
  }
  if (std::isnan(out.rhs) || std::isinf(out.rhs)) throw MilpError("non-finite right-hand side");
  return out;
}

SparseRow negated(const SparseRow& in) {
  SparseRow out = in;
  for (auto& v : out.value) v = -v;
  out.rhs = -in.rhs;
  return out;
}

}  // namespace

MilpInstance build_instance(std::vector<double> objective,
                            std::vector<SparseRow> rows,
                            std::vector<RowSense> senses,
                            std::vector<int> integer_set,
                            std::vector<std::pair<double, double>> bounds,
                            bool maximize, std::string name) {
  const int m_vars = static_cast<int>(objective.size());
  if (m_vars < 1) throw MilpError("instance needs at least one variable");
  if (rows.empty()) throw MilpError("instance needs at least one row");
  if (bounds.size() != static_cast<std::size_t>(m_vars))
    throw MilpError("bounds length does not match variable count");
  if (!senses.empty() && senses.size() != rows.size())
    throw MilpError("senses length does not match row count");

  MilpInstance inst;
  inst.name = std::move(name);
  inst.negated_from_max = maximize;
  inst.objective = std::move(objective);
  for (double& c : inst.objective) {
    if (std::isnan(c) || std::isinf(c)) throw MilpError("non-finite objective coefficient");
    if (maximize) c = -c;
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowSense sense = senses.empty() ? RowSense::LessEqual : senses[i];
    const SparseRow row = normalize_row(rows[i], m_vars);
    switch (sense) {
      case RowSense::LessEqual:
        inst.rows.push_back(row);
        break;
      case RowSense::GreaterEqual:
        inst.rows.push_back(negated(row));
        break;
      case RowSense::Equal:
        inst.rows.push_back(row);
        inst.rows.push_back(negated(row));
        break;
    }
  }

  inst.is_integer.assign(m_vars, 0);
  std::set<int> iset(integer_set.begin(), integer_set.end());
  for (int j : iset) {
    if (j < 0 || j >= m_vars)
      throw MilpError("integer index " + std::to_string(j) + " out of range");
    inst.is_integer[j] = 1;
    inst.integer_set.push_back(j);
  }

  inst.lower.resize(m_vars);
  inst.upper.resize(m_vars);
  for (int j = 0; j < m_vars; ++j) {
    double lo = bounds[j].first;
    double hi = bounds[j].second;
    if (std::isnan(lo) || std::isnan(hi)) throw MilpError("NaN bound");
    if (lo > hi) throw MilpError("invalid bounds for variable " + std::to_string(j));
    if (inst.is_integer[j]) {
      if (std::isinf(lo) || std::isinf(hi))
        throw MilpError("integer variable " + std::to_string(j) + " must have finite bounds");
      lo = std::ceil(lo - 1e-9);
      hi = std::floor(hi + 1e-9);
      if (lo > hi)
        throw MilpError("integer variable " + std::to_string(j) + " has empty integral range");
    }
    inst.lower[j] = lo;
    inst.upper[j] = hi;
  }
  return inst;
}

bool check_feasible(const MilpInstance& inst, const std::vector<double>& x,
                    const SolverTolerances& tol) {
  if (x.size() != static_cast<std::size_t>(inst.num_vars())) return false;
  for (int j = 0; j < inst.num_vars(); ++j) {
    if (x[j] < inst.lower[j] - tol.feasibility) return false;
    if (x[j] > inst.upper[j] + tol.feasibility) return false;
    if (inst.is_integer[j] && std::abs(x[j] - std::round(x[j])) > tol.integrality) return false;
  }
  for (const auto& row : inst.rows)
    if (row.violation(x) > tol.feasibility) return false;
  return true;
}

namespace {

// DFS in lexicographic order with incremental row activities. Strict
// improvement keeps the lexicographically smallest optimum.
struct Enumerator {
  const MilpInstance& inst;
  std::vector<std::vector<std::pair<int, double>>> cols;  // per var: (row, coeff)
  std::vector<double> point;
  std::vector<double> activity;
  double objective = 0.0;
  BruteForceResult best;

  explicit Enumerator(const MilpInstance& i)
      : inst(i), cols(i.num_vars()), point(i.num_vars()), activity(i.num_rows(), 0.0) {
    for (int r = 0; r < inst.num_rows(); ++r) {
      const auto& row = inst.rows[r];
      for (std::size_t k = 0; k < row.size(); ++k)
        cols[row.index[k]].emplace_back(r, row.value[k]);
    }
    for (int j = 0; j < inst.num_vars(); ++j) {
      point[j] = inst.lower[j];
      objective += inst.objective[j] * point[j];
    }
    for (int r = 0; r < inst.num_rows(); ++r) activity[r] = inst.rows[r].dot(point);
  }

  void set_var(int j, double val) {
    const double delta = val - point[j];
    if (delta == 0.0) return;
    for (const auto& [r, a] : cols[j]) activity[r] += a * delta;
    objective += inst.objective[j] * delta;
    point[j] = val;
  }

  void run(int j) {
    if (j == inst.num_vars()) {
      for (int r = 0; r < inst.num_rows(); ++r)
        if (activity[r] > inst.rows[r].rhs + 1e-9) return;
      if (!best.feasible || objective < best.objective - 1e-12) {
        best.feasible = true;
        best.objective = objective;
        best.x = point;
      }
      return;
    }
    for (double v = inst.lower[j]; v <= inst.upper[j] + 0.5; v += 1.0) {
      set_var(j, v);
      run(j + 1);
    }
    set_var(j, inst.lower[j]);
  }
};

}  // namespace

BruteForceResult brute_force_opt(const MilpInstance& inst, std::uint64_t enumeration_cap) {
  double lattice = 1.0;
  for (int j = 0; j < inst.num_vars(); ++j) {
    if (!inst.is_integer[j]) throw MilpError("brute force requires all variables integer");
    lattice *= inst.upper[j] - inst.lower[j] + 1.0;
    if (lattice > static_cast<double>(enumeration_cap))
      throw MilpError("enumeration cap exceeded");
  }
  Enumerator e(inst);
  e.run(0);
  return e.best;
}

}  // namespace cutstop
