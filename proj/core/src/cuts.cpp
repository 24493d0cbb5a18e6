#include "cutstop/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace cutstop {

namespace {

constexpr double kAway = 1e-4;       // minimum fractionality of the source row
constexpr double kCoefDrop = 1e-12;  // coefficients smaller than this are folded into the rhs

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

double frac(double v) { return v - std::floor(v); }

}  // namespace

std::uint64_t Cut::normalized_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  const double scale = norm > 0 ? 1.0 / norm : 1.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    h = fnv1a(h, static_cast<std::uint64_t>(row.index[k]));
    h = fnv1a(h, static_cast<std::uint64_t>(std::llround(row.value[k] * scale * 1e9)));
  }
  h = fnv1a(h, static_cast<std::uint64_t>(std::llround(row.rhs * scale * 1e9)));
  return h;
}

LpProblem NodeLp::to_lp() const {
  LpProblem lp;
  lp.objective = base->objective;
  lp.lower = lower;
  lp.upper = upper;
  lp.rows.reserve(num_rows());
  for (const auto& r : base->rows) lp.rows.push_back(r);
  for (const auto& c : cuts) lp.rows.push_back(c.row);
  return lp;
}

double cut_efficacy(const Cut& cut, const std::vector<double>& x) {
  return cut.row.violation(x) / cut.norm;
}

std::vector<Cut> separate_gmi(const LpSolution& sol, const NodeLp& node,
                              const SolverTolerances& tol, int round, double tau_sep) {
  std::vector<Cut> out;
  if (sol.status != LpStatus::Optimal || !sol.has_tableau()) return out;

  const MilpInstance& base = *node.base;
  const int n = sol.num_structural;
  const int m = node.num_rows();
  const int cols = n + m;

  std::vector<double> alpha(n);
  for (int r = 0; r < m; ++r) {
    const int bv = sol.basis[r];
    if (bv >= n || !base.is_integer[bv]) continue;
    const double xb = sol.col_value[bv];
    if (std::abs(xb - std::round(xb)) <= tol.integrality) continue;

    const double* row = sol.tableau_row(r);

    // Shift every nonbasic variable to its complemented form y >= 0 using
    // the global bounds, so the derived inequality is valid instance-wide
    // even under branching-tightened node bounds.
    double rhs_shift = row[cols];  // dictionary rhs
    bool usable = true;
    for (int j = 0; j < cols && usable; ++j) {
      if (sol.col_status[j] == ColStatus::Basic || row[j] == 0.0) continue;
      if (j < n) {
        if (sol.col_status[j] == ColStatus::Free) {
          usable = false;  // no finite bound to complement against
          break;
        }
        const double bound = sol.col_status[j] == ColStatus::AtUpper ? base.upper[j] : base.lower[j];
        if (!std::isfinite(bound)) {
          usable = false;
          break;
        }
        rhs_shift -= row[j] * bound;
      }
      // slack columns sit at zero; no shift
    }
    if (!usable) continue;

    const double f0 = frac(rhs_shift);
    if (f0 < kAway || f0 > 1.0 - kAway) continue;
    const double ratio = f0 / (1.0 - f0);

    std::fill(alpha.begin(), alpha.end(), 0.0);
    double rhs_acc = f0;
    bool bad = false;

    for (int j = 0; j < cols && !bad; ++j) {
      if (sol.col_status[j] == ColStatus::Basic) continue;
      const double a = row[j];
      if (a == 0.0) continue;

      double sign = 1.0;
      double bound = 0.0;
      bool integer_col = false;
      if (j < n) {
        if (sol.col_status[j] == ColStatus::AtUpper) {
          sign = -1.0;
          bound = base.upper[j];
        } else {
          bound = base.lower[j];
        }
        integer_col = base.is_integer[j] != 0;
      }
      const double a_shift = a * sign;

      double pi;
      if (integer_col) {
        const double fj = frac(a_shift);
        pi = fj <= f0 ? fj : ratio * (1.0 - fj);
      } else {
        pi = a_shift >= 0.0 ? a_shift : -a_shift * ratio;
      }
      if (pi == 0.0) continue;
      if (!std::isfinite(pi) || std::abs(pi) > 1e12) {
        bad = true;
        break;
      }

      if (j < n) {
        alpha[j] += pi * sign;
        rhs_acc += pi * sign * bound;
      } else {
        // substitute the slack: s_i = rhs_i - row_i . x
        const SparseRow& src = node.row(j - n);
        for (std::size_t k = 0; k < src.size(); ++k) alpha[src.index[k]] -= pi * src.value[k];
        rhs_acc -= pi * src.rhs;
      }
    }
    if (bad) continue;

    // alpha . x >= rhs_acc; flip to <= and prune tiny coefficients by
    // relaxing the rhs so validity is preserved exactly
    Cut cut;
    cut.origin_row = r;
    cut.origin_round = round;
    double le_rhs = -rhs_acc;
    double norm_sq = 0.0;
    bool droppable = true;
    for (int j = 0; j < n; ++j) {
      const double c = -alpha[j];
      if (c == 0.0) continue;
      if (std::abs(c) < kCoefDrop) {
        const double mag = std::max(std::abs(base.lower[j]), std::abs(base.upper[j]));
        if (!std::isfinite(mag)) {
          droppable = false;
          break;
        }
        le_rhs += std::abs(c) * mag;
        continue;
      }
      cut.row.index.push_back(j);
      cut.row.value.push_back(c);
      norm_sq += c * c;
    }
    if (!droppable || cut.row.index.empty()) continue;
    cut.row.rhs = le_rhs;
    cut.norm = std::sqrt(norm_sq);
    if (!(cut.norm > 1e-10)) continue;
    if (cut_efficacy(cut, sol.x) <= tau_sep) continue;
    out.push_back(std::move(cut));
  }
  return out;
}

std::vector<Cut> select_cuts(const std::vector<Cut>& pool, const std::vector<double>& x,
                             int max_per_round, double tau_sep) {
  if (max_per_round < 1) throw MilpError("max_per_round must be >= 1");
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double eff = cut_efficacy(pool[i], x);
    if (eff > tau_sep) ranked.emplace_back(eff, static_cast<int>(i));
  }
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    const int ra = pool[a.second].origin_row, rb = pool[b.second].origin_row;
    if (ra != rb) return ra < rb;
    return a.second < b.second;
  });
  std::vector<Cut> selected;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& [eff, idx] : ranked) {
    if (static_cast<int>(selected.size()) >= max_per_round) break;
    if (!seen.insert(pool[idx].normalized_hash()).second) continue;
    selected.push_back(pool[idx]);
  }
  return selected;
}

void stagnation_update(StallState& state, double new_objective) {
  if (std::isnan(new_objective)) throw MilpError("stagnation update with NaN objective");
  const double prev = state.prev_objective;
  const double delta = std::abs(prev - new_objective);
  // boundary equality must count as stagnation; the (1 + 1e-9) factor keeps
  // the <= test immune to decimal representation noise
  const double slack = state.eps * (1.0 + 1e-9);
  const bool stagnated =
      std::abs(prev) < 1e-10 ? delta <= slack : delta <= slack * std::abs(prev);
  state.counter = stagnated ? state.counter + 1 : 0;
  state.prev_objective = new_objective;
}

}  // namespace cutstop
