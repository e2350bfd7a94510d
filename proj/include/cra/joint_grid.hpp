#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "cra/marginal.hpp"
#include "cra/mechanism.hpp"

namespace cra {

// Joint distribution over an equispaced value grid, one axis per bidder.
// Dense matrix storage for two bidders, sparse cell map otherwise; iteration
// is lexicographic by index tuple in both cases.
class JointGrid {
 public:
  JointGrid(int n, std::vector<double> grid)
      : n_(n), grid_(std::move(grid)) {
    if (n < 2) throw std::invalid_argument("JointGrid: n must be >= 2");
    if (grid_.size() < 2) throw std::invalid_argument("JointGrid: grid too small");
    if (n_ == 2) dense_.assign(grid_.size() * grid_.size(), 0.0);
  }

  int n() const { return n_; }
  int m() const { return static_cast<int>(grid_.size()); }
  const std::vector<double>& grid() const { return grid_; }
  double step() const { return grid_[1] - grid_[0]; }

  void add(const std::vector<int>& idx, double w) {
    if (w < -1e-12)
      throw std::invalid_argument("JointGrid: cell mass below -1e-12");
    if (n_ == 2) {
      dense_[dense_index(idx)] += w;
    } else {
      check_index(idx);
      sparse_[idx] += w;
    }
  }

  double mass(const std::vector<int>& idx) const {
    if (n_ == 2) return std::max(0.0, dense_[dense_index(idx)]);
    check_index(idx);
    const auto it = sparse_.find(idx);
    return it == sparse_.end() ? 0.0 : std::max(0.0, it->second);
  }

  double total_mass() const {
    double s = 0.0;
    for_each([&](const std::vector<int>&, double w) { s += w; });
    return s;
  }

  std::size_t cell_count() const {
    if (n_ != 2) return sparse_.size();
    std::size_t c = 0;
    for (double w : dense_) c += (w != 0.0);
    return c;
  }

  // Visits occupied cells in lexicographic index order with clamped mass.
  template <class Fn>
  void for_each(const Fn& fn) const {
    if (n_ == 2) {
      std::vector<int> idx(2);
      const int m_ = m();
      for (int a = 0; a < m_; ++a)
        for (int b = 0; b < m_; ++b) {
          const double w = dense_[static_cast<std::size_t>(a) * m_ + b];
          if (w == 0.0) continue;
          idx[0] = a;
          idx[1] = b;
          fn(idx, std::max(0.0, w));
        }
    } else {
      for (const auto& [idx, w] : sparse_)
        if (w != 0.0) fn(idx, std::max(0.0, w));
    }
  }

  std::vector<double> marginal(int bidder) const {
    if (bidder < 0 || bidder >= n_)
      throw std::invalid_argument("JointGrid: bidder index out of range");
    std::vector<double> p(grid_.size(), 0.0);
    for_each([&](const std::vector<int>& idx, double w) { p[idx[bidder]] += w; });
    return p;
  }

  std::vector<double> node_values(const std::vector<int>& idx) const {
    std::vector<double> v(n_);
    for (int i = 0; i < n_; ++i) v[i] = grid_[idx[i]];
    return v;
  }

 private:
  std::size_t dense_index(const std::vector<int>& idx) const {
    check_index(idx);
    return static_cast<std::size_t>(idx[0]) * grid_.size() + idx[1];
  }

  void check_index(const std::vector<int>& idx) const {
    if (idx.size() != static_cast<std::size_t>(n_))
      throw std::invalid_argument("JointGrid: index arity mismatch");
    for (int j : idx)
      if (j < 0 || j >= m())
        throw std::invalid_argument("JointGrid: index out of range");
  }

  int n_;
  std::vector<double> grid_;
  std::vector<double> dense_;
  std::map<std::vector<int>, double> sparse_;
};

inline JointGrid independent_joint(const Marginal& f, int n, int m) {
  const auto d = discretize(f, m);
  JointGrid j(n, d.grid);
  std::vector<int> idx(n, 0);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= d.pmf[idx[i]];
    if (w > 0.0) j.add(idx, w);
    int k = n - 1;
    while (k >= 0 && idx[k] == m - 1) idx[k--] = 0;
    if (k < 0) break;
    ++idx[k];
  }
  return j;
}

// Maximal (comonotone) coupling of identical marginals: all mass on the
// diagonal.
inline JointGrid comonotone_joint(const Marginal& f, int n, int m) {
  const auto d = discretize(f, m);
  JointGrid j(n, d.grid);
  std::vector<int> idx(n);
  for (int k = 0; k < m; ++k) {
    if (d.pmf[k] == 0.0) continue;
    std::fill(idx.begin(), idx.end(), k);
    j.add(idx, d.pmf[k]);
  }
  return j;
}

// Conditional virtual values on the occupied cells of a coupling.  For
// bidder i at cell v, phi = v_i - (strict upper tail mass along own axis) /
// (cell mass / grid step); the top grid node uses its mass directly, so
// phi = v_i there.  Cells with zero conditional mass get phi = 0.
struct VirtualField {
  int n = 0;
  std::vector<double> grid;
  std::map<std::vector<int>, std::vector<double>> phi;

  double at(const std::vector<int>& idx, int bidder) const {
    const auto it = phi.find(idx);
    if (it == phi.end()) return 0.0;
    return it->second[bidder];
  }
};

inline VirtualField virtual_values(const JointGrid& j) {
  VirtualField out;
  out.n = j.n();
  out.grid = j.grid();
  const int top = j.m() - 1;
  const double h = j.step();

  // Initialize entries for every occupied cell.
  j.for_each([&](const std::vector<int>& idx, double) {
    out.phi.emplace(idx, std::vector<double>(j.n(), 0.0));
  });

  // Group cells by the others' indices, one pass per bidder.
  for (int i = 0; i < j.n(); ++i) {
    std::map<std::vector<int>, std::vector<std::pair<int, double>>> columns;
    j.for_each([&](const std::vector<int>& idx, double w) {
      std::vector<int> key;
      key.reserve(idx.size() - 1);
      for (int t = 0; t < j.n(); ++t)
        if (t != i) key.push_back(idx[t]);
      columns[key].emplace_back(idx[i], w);
    });
    std::vector<int> idx(j.n());
    for (auto& [key, col] : columns) {
      std::sort(col.begin(), col.end());
      double tail = 0.0;
      for (auto it = col.rbegin(); it != col.rend(); ++it) {
        const auto [vi, w] = *it;
        int t = 0;
        for (int s = 0; s < j.n(); ++s) idx[s] = (s == i) ? vi : key[t++];
        double& slot = out.phi[idx][i];
        if (w <= 0.0)
          slot = 0.0;
        else if (vi == top)
          slot = j.grid()[vi];
        else
          slot = j.grid()[vi] - tail * h / w;
        tail += w;
      }
    }
  }
  return out;
}

inline double expected_payment(const Mechanism& mech, const JointGrid& j) {
  if (mech.n() != j.n())
    throw std::invalid_argument("expected_payment: bidder count mismatch");
  double s = 0.0;
  j.for_each([&](const std::vector<int>& idx, double w) {
    s += w * mech.total_payment(j.node_values(idx));
  });
  return s;
}

// Expected total virtual surplus E[sum_i q_i(v) phi_i(v)].  Equals expected
// payment exactly for grid mechanisms whose payments are the discrete
// Myerson sums.
inline double expected_virtual_surplus(const Mechanism& mech,
                                       const JointGrid& j) {
  if (mech.n() != j.n())
    throw std::invalid_argument("expected_virtual_surplus: bidder count mismatch");
  const VirtualField phi = virtual_values(j);
  double s = 0.0;
  j.for_each([&](const std::vector<int>& idx, double w) {
    const auto q = mech.allocation(j.node_values(idx));
    const auto& p = phi.phi.at(idx);
    for (int i = 0; i < j.n(); ++i) s += w * q[i] * p[i];
  });
  return s;
}

}  // namespace cra
