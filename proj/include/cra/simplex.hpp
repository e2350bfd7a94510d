#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cra {

// Equality-form LP data: min c'x subject to A x = b, x >= 0, with A stored
// column-wise as (row, coefficient) pairs.
struct SparseColumns {
  int rows = 0;
  std::vector<std::vector<std::pair<int, double>>> cols;
};

struct LpSolution {
  enum class Status { optimal, infeasible, unbounded, iteration_limit };
  Status status = Status::iteration_limit;
  std::vector<double> x;
  std::vector<double> y;  // row duals; feasible for A'y <= c at optimality
  double objective = 0.0;
  int iterations = 0;
};

namespace detail {

// Two-phase revised simplex with a dense explicit basis inverse, Dantzig
// pricing with a Bland fallback after long degenerate runs, and periodic
// refactorization.  Sized for the transportation-style problems here
// (hundreds of rows, up to ~10^5 columns with very sparse columns).
class RevisedSimplex {
 public:
  RevisedSimplex(const SparseColumns& a, std::vector<double> b,
                 std::vector<double> c)
      : a_(a),
        b_(std::move(b)),
        c_(std::move(c)),
        rows_(a.rows),
        n_(static_cast<int>(a.cols.size())) {
    if (static_cast<int>(b_.size()) != rows_)
      throw std::invalid_argument("simplex: rhs size mismatch");
    if (static_cast<int>(c_.size()) != n_)
      throw std::invalid_argument("simplex: cost size mismatch");
    for (double v : b_)
      if (v < 0.0) throw std::invalid_argument("simplex: rhs must be >= 0");
    for (const auto& col : a_.cols)
      for (const auto& [r, va] : col) {
        (void)va;
        if (r < 0 || r >= rows_)
          throw std::invalid_argument("simplex: row index out of range");
      }
  }

  LpSolution solve(int max_iterations) {
    if (max_iterations <= 0) max_iterations = 20000 + 60 * rows_;
    basic_.resize(rows_);
    in_basis_.assign(n_, 0);
    binv_.assign(static_cast<std::size_t>(rows_) * rows_, 0.0);
    for (int r = 0; r < rows_; ++r) {
      basic_[r] = n_ + r;
      binv_[static_cast<std::size_t>(r) * rows_ + r] = 1.0;
    }
    xb_ = b_;
    phase1_ = true;

    LpSolution out;
    Status st = iterate(max_iterations);
    if (st == Status::iteration_limit) return finish(out, st);
    double artificial_mass = 0.0;
    for (int r = 0; r < rows_; ++r)
      if (basic_[r] >= n_) artificial_mass += xb_[r];
    if (artificial_mass > 1e-8) return finish(out, Status::infeasible);
    for (int r = 0; r < rows_; ++r)
      if (basic_[r] >= n_) xb_[r] = 0.0;

    purge_artificials();
    phase1_ = false;
    bland_ = false;
    degenerate_run_ = 0;
    st = iterate(max_iterations);
    return finish(out, st);
  }

 private:
  using Status = LpSolution::Status;

  static constexpr double kDualTol = 1e-10;
  static constexpr double kPivotTol = 1e-10;
  static constexpr int kRefactorEvery = 100;
  static constexpr int kBlandAfter = 500;

  double cost_of(int j) const {
    if (phase1_) return j >= n_ ? 1.0 : 0.0;
    return j >= n_ ? 0.0 : c_[j];
  }

  void compute_y(std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int i = 0; i < rows_; ++i) {
      const double cb = cost_of(basic_[i]);
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(i) * rows_];
      for (int r = 0; r < rows_; ++r) y[r] += cb * row[r];
    }
  }

  int price(const std::vector<double>& y) const {
    int best = -1;
    double best_d = -kDualTol;
    for (int j = 0; j < n_; ++j) {
      if (in_basis_[j]) continue;
      double d = cost_of(j);
      for (const auto& [r, a] : a_.cols[j]) d -= y[r] * a;
      if (bland_) {
        if (d < -kDualTol) return j;
      } else if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  }

  void ftran(int j, std::vector<double>& w) const {
    std::fill(w.begin(), w.end(), 0.0);
    if (j >= n_) {
      const int r = j - n_;
      for (int i = 0; i < rows_; ++i)
        w[i] = binv_[static_cast<std::size_t>(i) * rows_ + r];
      return;
    }
    for (const auto& [r, a] : a_.cols[j])
      for (int i = 0; i < rows_; ++i)
        w[i] += binv_[static_cast<std::size_t>(i) * rows_ + r] * a;
  }

  int choose_leave(const std::vector<double>& w, double& theta) const {
    // A basic artificial already driven to zero must never move again (it
    // would re-open the equality it patches); take it out at a degenerate
    // step as soon as the entering column touches its row.  Artificials
    // still at positive level leave through the ordinary ratio test.
    for (int i = 0; i < rows_; ++i)
      if (basic_[i] >= n_ && xb_[i] <= 1e-12 && std::abs(w[i]) > kPivotTol) {
        theta = 0.0;
        return i;
      }
    int leave = -1;
    theta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows_; ++i) {
      if (w[i] <= kPivotTol) continue;
      const double t = std::max(0.0, xb_[i]) / w[i];
      if (t < theta - 1e-12) {
        theta = t;
        leave = i;
      } else if (t < theta + 1e-12 && leave >= 0) {
        const bool take = bland_ ? basic_[i] < basic_[leave]
                                 : w[i] > w[leave];
        if (take) {
          theta = std::min(theta, t);
          leave = i;
        }
      }
    }
    return leave;
  }

  void pivot(int enter, int leave_row, double theta,
             const std::vector<double>& w) {
    for (int i = 0; i < rows_; ++i) xb_[i] -= theta * w[i];
    xb_[leave_row] = theta;

    const double piv = w[leave_row];
    double* lrow = &binv_[static_cast<std::size_t>(leave_row) * rows_];
    for (int r = 0; r < rows_; ++r) lrow[r] /= piv;
    for (int i = 0; i < rows_; ++i) {
      if (i == leave_row || w[i] == 0.0) continue;
      const double f = w[i];
      double* row = &binv_[static_cast<std::size_t>(i) * rows_];
      for (int r = 0; r < rows_; ++r) row[r] -= f * lrow[r];
    }

    if (basic_[leave_row] < n_) in_basis_[basic_[leave_row]] = 0;
    basic_[leave_row] = enter;
    if (enter < n_) in_basis_[enter] = 1;
    if (++pivots_since_refactor_ >= kRefactorEvery) refactor();
  }

  void refactor() {
    const std::size_t rr = static_cast<std::size_t>(rows_);
    std::vector<double> m(rr * rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      const int j = basic_[i];
      if (j >= n_)
        m[static_cast<std::size_t>(j - n_) * rows_ + i] = 1.0;
      else
        for (const auto& [r, a] : a_.cols[j])
          m[static_cast<std::size_t>(r) * rows_ + i] = a;
    }
    std::vector<double> inv(rr * rows_, 0.0);
    for (int i = 0; i < rows_; ++i) inv[i * rr + i] = 1.0;
    for (int col = 0; col < rows_; ++col) {
      int p = col;
      for (int r = col + 1; r < rows_; ++r)
        if (std::abs(m[r * rr + col]) > std::abs(m[p * rr + col])) p = r;
      if (std::abs(m[p * rr + col]) < 1e-12)
        throw std::runtime_error("simplex: singular basis on refactorization");
      if (p != col) {
        for (int r = 0; r < rows_; ++r) {
          std::swap(m[p * rr + r], m[col * rr + r]);
          std::swap(inv[p * rr + r], inv[col * rr + r]);
        }
      }
      const double d = m[col * rr + col];
      for (int r = 0; r < rows_; ++r) {
        m[col * rr + r] /= d;
        inv[col * rr + r] /= d;
      }
      for (int i = 0; i < rows_; ++i) {
        if (i == col) continue;
        const double f = m[i * rr + col];
        if (f == 0.0) continue;
        for (int r = 0; r < rows_; ++r) {
          m[i * rr + r] -= f * m[col * rr + r];
          inv[i * rr + r] -= f * inv[col * rr + r];
        }
      }
    }
    binv_ = std::move(inv);
    for (int i = 0; i < rows_; ++i) {
      double v = 0.0;
      const double* row = &binv_[static_cast<std::size_t>(i) * rows_];
      for (int r = 0; r < rows_; ++r) v += row[r] * b_[r];
      xb_[i] = std::max(0.0, v);
    }
    pivots_since_refactor_ = 0;
  }

  // After phase 1, drive out artificials that still sit (at zero) in the
  // basis wherever a structural column crosses their row; rows where none
  // does are redundant and keep their artificial at zero, cost-free.
  void purge_artificials() {
    std::vector<double> w(rows_);
    for (int i = 0; i < rows_; ++i) {
      if (basic_[i] < n_) continue;
      int found = -1;
      for (int j = 0; j < n_ && found < 0; ++j) {
        if (in_basis_[j]) continue;
        double t = 0.0;
        for (const auto& [r, a] : a_.cols[j])
          t += binv_[static_cast<std::size_t>(i) * rows_ + r] * a;
        if (std::abs(t) > 1e-9) found = j;
      }
      if (found >= 0) {
        ftran(found, w);
        pivot(found, i, 0.0, w);
      }
    }
  }

  Status iterate(int max_iterations) {
    std::vector<double> y(rows_), w(rows_);
    while (iterations_ < max_iterations) {
      compute_y(y);
      const int enter = price(y);
      if (enter < 0) return Status::optimal;
      ftran(enter, w);
      double theta = 0.0;
      const int leave = choose_leave(w, theta);
      if (leave < 0) return Status::unbounded;
      pivot(enter, leave, theta, w);
      ++iterations_;
      if (theta <= 1e-13) {
        if (++degenerate_run_ > kBlandAfter) bland_ = true;
      } else {
        degenerate_run_ = 0;
      }
    }
    return Status::iteration_limit;
  }

  LpSolution& finish(LpSolution& out, Status st) {
    out.status = st;
    out.iterations = iterations_;
    out.x.assign(n_, 0.0);
    for (int i = 0; i < rows_; ++i)
      if (basic_[i] < n_) out.x[basic_[i]] = std::max(0.0, xb_[i]);
    out.y.assign(rows_, 0.0);
    if (st == Status::optimal || st == Status::iteration_limit) {
      const bool keep_phase = phase1_;
      phase1_ = false;
      compute_y(out.y);
      phase1_ = keep_phase;
      out.objective = 0.0;
      for (int j = 0; j < n_; ++j) out.objective += c_[j] * out.x[j];
    }
    return out;
  }

  const SparseColumns& a_;
  std::vector<double> b_;
  std::vector<double> c_;
  int rows_;
  int n_;

  std::vector<int> basic_;
  std::vector<char> in_basis_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  bool phase1_ = true;
  bool bland_ = false;
  int degenerate_run_ = 0;
  int pivots_since_refactor_ = 0;
  int iterations_ = 0;
};

}  // namespace detail

inline LpSolution solve_lp_min(const SparseColumns& a,
                               const std::vector<double>& b,
                               const std::vector<double>& c,
                               int max_iterations = 0) {
  detail::RevisedSimplex s(a, b, c);
  return s.solve(max_iterations);
}

}  // namespace cra
