#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "cra/joint_grid.hpp"

// Brute-force reference results used to pin down the LP layer.
namespace oracle {

// Minimum-cost 3x3 transportation value by enumerating every candidate
// basis (5 of the 9 cells), solving the equality system directly, and
// keeping the feasible vertices.  The column-2 balance equation is implied
// by the others when the marginals balance, so five equations suffice.
inline double transport3_vertex_min(const std::array<double, 3>& p,
                                    const std::array<double, 3>& q,
                                    const std::array<std::array<double, 3>, 3>& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < 512; ++mask) {
    if (__builtin_popcount(mask) != 5) continue;
    int cells[5], k = 0;
    for (int cell = 0; cell < 9; ++cell)
      if (mask & (1 << cell)) cells[k++] = cell;

    // Equations: rows 0..2 then columns 0..1.
    double a[5][6] = {};
    for (int e = 0; e < 5; ++e) {
      for (int j = 0; j < 5; ++j) {
        const int row = cells[j] / 3, col = cells[j] % 3;
        a[e][j] = e < 3 ? (row == e ? 1.0 : 0.0) : (col == e - 3 ? 1.0 : 0.0);
      }
      a[e][5] = e < 3 ? p[e] : q[e - 3];
    }

    bool singular = false;
    for (int col = 0; col < 5 && !singular; ++col) {
      int piv = col;
      for (int r = col + 1; r < 5; ++r)
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      if (std::abs(a[piv][col]) < 1e-10) {
        singular = true;
        break;
      }
      if (piv != col)
        for (int j = col; j < 6; ++j) std::swap(a[piv][j], a[col][j]);
      for (int r = 0; r < 5; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        if (f == 0.0) continue;
        for (int j = col; j < 6; ++j) a[r][j] -= f * a[col][j];
      }
    }
    if (singular) continue;

    double x[5], value = 0.0;
    bool feasible = true;
    double col2 = 0.0;
    for (int j = 0; j < 5; ++j) {
      x[j] = a[j][5] / a[j][j];
      if (x[j] < -1e-9) feasible = false;
      value += x[j] * c[cells[j] / 3][cells[j] % 3];
      if (cells[j] % 3 == 2) col2 += x[j];
    }
    if (!feasible || std::abs(col2 - q[2]) > 1e-7) continue;
    best = std::min(best, value);
  }
  if (!std::isfinite(best))
    throw std::runtime_error("transport oracle: no feasible vertex");
  return best;
}

// Strictly positive pmf with mass bounded away from zero on every node.
inline std::vector<double> random_pmf(std::mt19937& rng, int m) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(m);
  double s = 0.0;
  for (double& v : p) {
    v = u(rng);
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

// Random point of the transportation polytope: start from the independent
// product and apply mass-preserving rectangle rotations in random
// two-bidder planes.  Flat layout is lexicographic, bidder 0 slowest.
inline std::vector<double> random_coupling_flat(
    const std::vector<std::vector<double>>& pmfs, std::mt19937& rng,
    int rotations = 300) {
  const int n = static_cast<int>(pmfs.size());
  const int m = static_cast<int>(pmfs[0].size());
  std::size_t cells = 1;
  for (int i = 0; i < n; ++i) cells *= static_cast<std::size_t>(m);

  std::vector<double> w(cells);
  std::vector<int> idx(n, 0);
  std::vector<std::size_t> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * m;
  for (std::size_t flat = 0; flat < cells; ++flat) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= pmfs[i][idx[i]];
    w[flat] = v;
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }

  std::uniform_int_distribution<int> node(0, m - 1);
  std::uniform_int_distribution<int> bidder(0, n - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int step = 0; step < rotations; ++step) {
    int i = bidder(rng), j = bidder(rng);
    if (i == j) continue;
    const int a = node(rng), b = node(rng), c = node(rng), d = node(rng);
    if (a == b || c == d) continue;
    std::fill(idx.begin(), idx.end(), 0);
    for (int k = 0; k < n; ++k)
      if (k != i && k != j) idx[k] = node(rng);
    auto flat_at = [&](int vi, int vj) {
      std::size_t f = 0;
      for (int k = 0; k < n; ++k) {
        int v = idx[k];
        if (k == i) v = vi;
        if (k == j) v = vj;
        f += static_cast<std::size_t>(v) * stride[k];
      }
      return f;
    };
    const std::size_t ac = flat_at(a, c), bd = flat_at(b, d);
    const std::size_t ad = flat_at(a, d), bc = flat_at(b, c);
    const double eps = u01(rng) * std::min(w[ad], w[bc]);
    w[ac] += eps;
    w[bd] += eps;
    w[ad] -= eps;
    w[bc] -= eps;
  }
  return w;
}

inline cra::JointGrid to_joint(const std::vector<double>& flat, int n,
                               const std::vector<double>& grid) {
  cra::JointGrid j(n, grid);
  const int m = static_cast<int>(grid.size());
  std::size_t cells = 1;
  for (int i = 0; i < n; ++i) cells *= static_cast<std::size_t>(m);
  if (flat.size() != cells)
    throw std::invalid_argument("to_joint: cell count mismatch");
  std::vector<int> idx(n, 0);
  for (std::size_t f = 0; f < cells; ++f) {
    if (flat[f] > 0.0) j.add(idx, flat[f]);
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }
  return j;
}

}  // namespace oracle
