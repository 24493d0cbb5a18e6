#include "cutstop/simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cutstop {

namespace {

constexpr double kDropTol = 1e-13;

// Dense bounded-variable primal simplex working on the full tableau.
// Column layout: [structural | slack | artificial]; the dictionary rhs is
// kept per row. Invariant: T x = rhs for every x satisfying the original
// equations, with basic columns forming the identity.
class Simplex {
 public:
  Simplex(const LpProblem& lp, const SolverTolerances& tol,
          const std::vector<ColStatus>* warm)
      : lp_(lp), tol_(tol), m_(lp.num_rows()), n_(lp.num_vars()) {
    width_ = n_ + 2 * m_;  // room for one artificial per row
    tab_.assign(static_cast<std::size_t>(m_) * width_, 0.0);
    rhs_.assign(m_, 0.0);
    low_.assign(width_, 0.0);
    upp_.assign(width_, 0.0);
    xval_.assign(width_, 0.0);
    status_.assign(width_, ColStatus::AtLower);
    d_.assign(width_, 0.0);
    basis_.assign(m_, -1);
    beta_.assign(m_, 0.0);

    for (int i = 0; i < m_; ++i) {
      const SparseRow& row = lp.rows[i];
      for (std::size_t k = 0; k < row.size(); ++k) at(i, row.index[k]) = row.value[k];
      at(i, n_ + i) = 1.0;
      rhs_[i] = row.rhs;
    }
    for (int j = 0; j < n_; ++j) {
      low_[j] = lp.lower[j];
      upp_[j] = lp.upper[j];
      status_[j] = initial_status(j, warm);
      xval_[j] = nonbasic_value(j);
    }
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      low_[s] = 0.0;
      upp_[s] = kInf;
      status_[s] = ColStatus::Basic;
      basis_[i] = s;
    }
    ncols_ = n_ + m_;
    recompute_beta();
  }

  LpSolution solve() {
    for (int j = 0; j < n_; ++j)
      if (low_[j] > upp_[j]) return finish(LpStatus::Infeasible);

    if (needs_phase1()) {
      setup_phase1();
      const LpStatus st = iterate(/*phase1=*/true);
      if (st == LpStatus::IterationLimit) return finish(st);
      recompute_beta();
      if (phase_objective(true) > tol_.feasibility) return finish(LpStatus::Infeasible);
      retire_artificials();
    }
    setup_phase2();
    const LpStatus st = iterate(/*phase1=*/false);
    return finish(st);
  }

 private:
  double& at(int i, int j) { return tab_[static_cast<std::size_t>(i) * width_ + j]; }
  double at(int i, int j) const { return tab_[static_cast<std::size_t>(i) * width_ + j]; }

  bool is_artificial(int j) const { return j >= n_ + m_; }

  ColStatus initial_status(int j, const std::vector<ColStatus>* warm) const {
    if (warm && warm->size() == static_cast<std::size_t>(n_)) {
      const ColStatus s = (*warm)[j];
      if (s == ColStatus::AtLower && std::isfinite(low_[j])) return s;
      if (s == ColStatus::AtUpper && std::isfinite(upp_[j])) return s;
    }
    if (std::isfinite(low_[j])) return ColStatus::AtLower;
    if (std::isfinite(upp_[j])) return ColStatus::AtUpper;
    return ColStatus::Free;
  }

  double nonbasic_value(int j) const {
    switch (status_[j]) {
      case ColStatus::AtLower: return low_[j];
      case ColStatus::AtUpper: return upp_[j];
      default: return 0.0;
    }
  }

  void recompute_beta() {
    for (int i = 0; i < m_; ++i) {
      double acc = rhs_[i];
      for (int j = 0; j < ncols_; ++j)
        if (status_[j] != ColStatus::Basic && xval_[j] != 0.0) acc -= at(i, j) * xval_[j];
      beta_[i] = acc;
    }
  }

  bool needs_phase1() const {
    for (int i = 0; i < m_; ++i)
      if (beta_[i] < -tol_.feasibility) return true;
    return false;
  }

  void setup_phase1() {
    for (int i = 0; i < m_; ++i) {
      if (beta_[i] >= -tol_.feasibility) continue;
      const int a = n_ + m_ + i;
      // flip the row so the artificial enters with coefficient +1
      for (int j = 0; j < n_ + m_; ++j) at(i, j) = -at(i, j);
      rhs_[i] = -rhs_[i];
      at(i, a) = 1.0;
      upp_[a] = kInf;
      const int s = basis_[i];
      status_[s] = ColStatus::AtLower;
      xval_[s] = 0.0;
      basis_[i] = a;
      status_[a] = ColStatus::Basic;
      beta_[i] = -beta_[i];
    }
    ncols_ = n_ + 2 * m_;
    // phase-1 reduced costs: unit cost on artificials
    for (int j = 0; j < ncols_; ++j) {
      double acc = is_artificial(j) && upp_[j] > 0.0 ? 1.0 : 0.0;
      for (int i = 0; i < m_; ++i)
        if (is_artificial(basis_[i])) acc -= at(i, j);
      d_[j] = acc;
    }
  }

  // After a feasible phase 1: fix artificials at zero and pivot any basic
  // ones out so the final basis is drawn from [A I] only.
  void retire_artificials() {
    for (int k = 0; k < m_; ++k) {
      const int a = n_ + m_ + k;
      upp_[a] = 0.0;
      if (status_[a] != ColStatus::Basic) {
        status_[a] = ColStatus::AtLower;
        xval_[a] = 0.0;
      }
    }
    for (int r = 0; r < m_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      int q = -1;
      double best = tol_.pivot;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == ColStatus::Basic) continue;
        const double mag = std::abs(at(r, j));
        if (mag > best) {
          best = mag;
          q = j;
        }
      }
      if (q < 0) throw SingularBasisError(r);
      pivot(r, q, /*sigma=*/+1, /*step=*/0.0);
    }
  }

  void setup_phase2() {
    for (int j = 0; j < ncols_; ++j) {
      double acc = j < n_ ? lp_.objective[j] : 0.0;
      for (int i = 0; i < m_; ++i) {
        const int b = basis_[i];
        if (b < n_ && lp_.objective[b] != 0.0) acc -= lp_.objective[b] * at(i, j);
      }
      d_[j] = acc;
    }
    recompute_beta();
  }

  double phase_objective(bool phase1) const {
    double z = 0.0;
    if (phase1) {
      for (int i = 0; i < m_; ++i)
        if (is_artificial(basis_[i])) z += beta_[i];
    } else {
      for (int j = 0; j < n_; ++j)
        if (status_[j] != ColStatus::Basic) z += lp_.objective[j] * xval_[j];
      for (int i = 0; i < m_; ++i)
        if (basis_[i] < n_) z += lp_.objective[basis_[i]] * beta_[i];
    }
    return z;
  }

  bool eligible(int j, int* sigma) const {
    if (status_[j] == ColStatus::Basic) return false;
    if (upp_[j] - low_[j] < 1e-12) return false;  // fixed column
    switch (status_[j]) {
      case ColStatus::AtLower:
        if (d_[j] < -tol_.pivot) { *sigma = +1; return true; }
        return false;
      case ColStatus::AtUpper:
        if (d_[j] > tol_.pivot) { *sigma = -1; return true; }
        return false;
      case ColStatus::Free:
        if (d_[j] < -tol_.pivot) { *sigma = +1; return true; }
        if (d_[j] > tol_.pivot) { *sigma = -1; return true; }
        return false;
      default:
        return false;
    }
  }

  int pick_entering(bool bland, int* sigma) const {
    int best = -1, best_sigma = 0;
    double best_score = 0.0;
    for (int j = 0; j < ncols_; ++j) {
      int sg = 0;
      if (!eligible(j, &sg)) continue;
      if (bland) {
        *sigma = sg;
        return j;
      }
      const double score = std::abs(d_[j]);
      if (score > best_score + 1e-15) {
        best_score = score;
        best = j;
        best_sigma = sg;
      }
    }
    *sigma = best_sigma;
    return best;
  }

  double blocking_step(int i, int q, int sigma) const {
    const double g = sigma * at(i, q);
    const int k = basis_[i];
    if (g > tol_.pivot) {
      if (!std::isfinite(low_[k])) return kInf;
      return std::max(0.0, (beta_[i] - low_[k]) / g);
    }
    if (g < -tol_.pivot) {
      if (!std::isfinite(upp_[k])) return kInf;
      return std::max(0.0, (beta_[i] - upp_[k]) / g);
    }
    return kInf;
  }

  struct Ratio {
    double step = kInf;
    int row = -1;  // -1: bound flip of the entering variable
    bool unbounded = false;
  };

  Ratio ratio_test(int q, int sigma, bool bland) const {
    const double own = upp_[q] - low_[q];
    double trow = kInf;
    for (int i = 0; i < m_; ++i) trow = std::min(trow, blocking_step(i, q, sigma));

    Ratio res;
    if (!std::isfinite(own) && !std::isfinite(trow)) {
      res.unbounded = true;
      return res;
    }
    if (own <= trow) {  // flip preferred on ties: no basis change needed
      res.step = own;
      return res;
    }
    res.step = trow;
    const double window = trow + 1e-12 * std::max(1.0, trow);
    int best_row = -1;
    double best_piv = 0.0;
    int best_key = std::numeric_limits<int>::max();
    for (int i = 0; i < m_; ++i) {
      const double t = blocking_step(i, q, sigma);
      if (t > window) continue;
      if (bland) {
        if (basis_[i] < best_key) {
          best_key = basis_[i];
          best_row = i;
        }
      } else {
        const double piv = std::abs(at(i, q));
        if (piv > best_piv + 1e-15) {
          best_piv = piv;
          best_row = i;
        }
      }
    }
    res.row = best_row;
    return res;
  }

  void flip_bound(int q, int sigma, double step) {
    if (step != 0.0)
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, q);
        if (a != 0.0) beta_[i] -= sigma * step * a;
      }
    if (status_[q] == ColStatus::AtLower) {
      status_[q] = ColStatus::AtUpper;
      xval_[q] = upp_[q];
    } else {
      status_[q] = ColStatus::AtLower;
      xval_[q] = low_[q];
    }
  }

  void pivot(int r, int q, int sigma, double step) {
    const double enter_value = xval_[q] + sigma * step;
    const int leaving = basis_[r];
    const double g = sigma * at(r, q);

    if (step != 0.0)
      for (int i = 0; i < m_; ++i)
        if (i != r) beta_[i] -= sigma * step * at(i, q);

    const double inv = 1.0 / at(r, q);
    for (int j = 0; j < ncols_; ++j) {
      double& v = at(r, j);
      v *= inv;
      if (v != 0.0 && std::abs(v) < kDropTol) v = 0.0;
    }
    rhs_[r] *= inv;
    at(r, q) = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, q);
      if (f == 0.0) continue;
      for (int j = 0; j < ncols_; ++j) {
        double& v = at(i, j);
        v -= f * at(r, j);
        if (v != 0.0 && std::abs(v) < kDropTol) v = 0.0;
      }
      rhs_[i] -= f * rhs_[r];
      at(i, q) = 0.0;
    }
    const double dq = d_[q];
    if (dq != 0.0)
      for (int j = 0; j < ncols_; ++j) d_[j] -= dq * at(r, j);
    d_[q] = 0.0;

    basis_[r] = q;
    status_[q] = ColStatus::Basic;
    beta_[r] = enter_value;
    status_[leaving] = g > 0.0 ? ColStatus::AtLower : ColStatus::AtUpper;
    xval_[leaving] = nonbasic_value(leaving);
  }

  LpStatus iterate(bool phase1) {
    int no_improve = 0;
    double z_prev = phase_objective(phase1);
    const int bland_after = 2 * (m_ + ncols_);
    while (true) {
      if (iterations_ >= tol_.max_simplex_iterations) return LpStatus::IterationLimit;
      const bool bland = no_improve > bland_after;
      int sigma = 0;
      const int q = pick_entering(bland, &sigma);
      if (q < 0) return LpStatus::Optimal;
      const Ratio ratio = ratio_test(q, sigma, bland);
      if (ratio.unbounded) {
        if (phase1) throw MilpError("phase-1 objective unbounded");
        return LpStatus::Unbounded;
      }
      if (ratio.row < 0)
        flip_bound(q, sigma, ratio.step);
      else
        pivot(ratio.row, q, sigma, ratio.step);
      ++iterations_;
      if (iterations_ % 128 == 0) recompute_beta();
      const double z = phase_objective(phase1);
      if (z < z_prev - 1e-12)
        no_improve = 0;
      else
        ++no_improve;
      z_prev = z;
    }
  }

  // Rebuild the final dictionary from a fresh factorization of the optimal
  // basis so downstream cut separation reads rows free of pivot drift.
  void refresh(LpSolution& out) const {
    const int cols = n_ + m_;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (b < n_) {
        for (int r = 0; r < m_; ++r) {
          const SparseRow& row = lp_.rows[r];
          const auto it = std::lower_bound(row.index.begin(), row.index.end(), b);
          if (it != row.index.end() && *it == b) B(r, i) = row.value[it - row.index.begin()];
        }
      } else {
        B(b - n_, i) = 1.0;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const auto diag = lu.matrixLU().diagonal();
    for (int i = 0; i < m_; ++i)
      if (std::abs(diag(i)) < 1e-12) throw SingularBasisError(i);

    Eigen::MatrixXd block(m_, cols + 1);
    block.setZero();
    for (int r = 0; r < m_; ++r) {
      const SparseRow& row = lp_.rows[r];
      for (std::size_t k = 0; k < row.size(); ++k) block(r, row.index[k]) = row.value[k];
      block(r, n_ + r) = 1.0;
      block(r, cols) = row.rhs;
    }
    const Eigen::MatrixXd dict = lu.solve(block);

    out.tableau_cols = cols + 1;
    out.tableau.assign(static_cast<std::size_t>(m_) * (cols + 1), 0.0);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j <= cols; ++j)
        out.tableau[static_cast<std::size_t>(i) * (cols + 1) + j] = dict(i, j);

    for (int j = 0; j < cols; ++j)
      out.col_value[j] = status_[j] == ColStatus::Basic ? 0.0 : xval_[j];
    for (int i = 0; i < m_; ++i) {
      double acc = dict(i, cols);
      for (int j = 0; j < cols; ++j)
        if (status_[j] != ColStatus::Basic && xval_[j] != 0.0) acc -= dict(i, j) * xval_[j];
      out.col_value[basis_[i]] = acc;
    }

    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = basis_[i] < n_ ? lp_.objective[basis_[i]] : 0.0;
    const Eigen::VectorXd y = lu.transpose().solve(cb);
    out.dual.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) out.dual[i] = y(i);
    out.reduced_cost.assign(cols, 0.0);
    for (int j = 0; j < n_; ++j) {
      double acc = lp_.objective[j];
      for (int r = 0; r < m_; ++r) {
        const SparseRow& row = lp_.rows[r];
        const auto it = std::lower_bound(row.index.begin(), row.index.end(), j);
        if (it != row.index.end() && *it == j) acc -= y(r) * row.value[it - row.index.begin()];
      }
      out.reduced_cost[j] = acc;
    }
    for (int i = 0; i < m_; ++i) out.reduced_cost[n_ + i] = -y(i);
  }

  LpSolution finish(LpStatus st) {
    LpSolution out;
    out.status = st;
    out.iterations = iterations_;
    out.num_structural = n_;
    const int cols = n_ + m_;
    out.col_value.assign(cols, 0.0);
    out.col_status.assign(cols, ColStatus::AtLower);
    for (int j = 0; j < cols; ++j) out.col_status[j] = status_[j];
    out.basis = basis_;

    if (st == LpStatus::Optimal) {
      refresh(out);
    } else {
      for (int j = 0; j < cols; ++j)
        out.col_value[j] = status_[j] == ColStatus::Basic ? 0.0 : xval_[j];
      for (int i = 0; i < m_; ++i)
        if (basis_[i] < cols) out.col_value[basis_[i]] = beta_[i];
    }
    out.x.assign(out.col_value.begin(), out.col_value.begin() + n_);
    switch (st) {
      case LpStatus::Optimal: {
        double z = 0.0;
        for (int j = 0; j < n_; ++j) z += lp_.objective[j] * out.x[j];
        out.objective = z;
        break;
      }
      case LpStatus::Infeasible:
        out.objective = kInf;
        break;
      case LpStatus::Unbounded:
        out.objective = -kInf;
        break;
      case LpStatus::IterationLimit:
        out.objective = phase_objective(false);
        break;
    }
    return out;
  }

  const LpProblem& lp_;
  const SolverTolerances& tol_;
  int m_ = 0;
  int n_ = 0;
  int width_ = 0;
  int ncols_ = 0;
  int iterations_ = 0;
  std::vector<double> tab_;
  std::vector<double> rhs_;
  std::vector<double> low_, upp_, xval_, d_;
  std::vector<ColStatus> status_;
  std::vector<int> basis_;
  std::vector<double> beta_;
};

}  // namespace

LpSolution lp_solve(const LpProblem& lp, const SolverTolerances& tol,
                    const std::vector<ColStatus>* warm_status) {
  if (lp.num_rows() == 0) throw MilpError("lp_solve requires at least one row");
  if (lp.lower.size() != lp.objective.size() || lp.upper.size() != lp.objective.size())
    throw MilpError("lp bound vectors do not match variable count");
  Simplex s(lp, tol, warm_status);
  return s.solve();
}

}  // namespace cutstop
