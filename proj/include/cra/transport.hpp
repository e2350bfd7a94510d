#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cra/joint_grid.hpp"
#include "cra/marginal.hpp"
#include "cra/mechanism.hpp"
#include "cra/simplex.hpp"

namespace cra {

// Per-bidder node prices lambda_i(x_k) supporting a revenue lower bound:
// feasible when sum_i lambda_i(v_i) <= sum_i t_i(v) on every value profile,
// in which case sum_i E[lambda_i(X_i)] under the marginals bounds expected
// revenue from below for every coupling.
struct DualCertificate {
  std::vector<double> grid;
  std::vector<std::vector<double>> lambda;  // [bidder][node]

  int bidders() const { return static_cast<int>(lambda.size()); }

  double value_against(const std::vector<std::vector<double>>& pmfs) const {
    if (pmfs.size() != lambda.size())
      throw std::invalid_argument("dual value: bidder count mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      if (pmfs[i].size() != lambda[i].size())
        throw std::invalid_argument("dual value: node count mismatch");
      for (std::size_t k = 0; k < lambda[i].size(); ++k)
        v += lambda[i][k] * pmfs[i][k];
    }
    return v;
  }

  double value_against(const DiscreteMarginal& d) const {
    return value_against(
        std::vector<std::vector<double>>(lambda.size(), d.pmf));
  }
};

struct LPResult {
  enum class Status { optimal, iteration_limit, infeasible_marginals };
  Status status = Status::iteration_limit;
  JointGrid coupling{2, {0.0, 1.0}};
  double primal = 0.0;
  DualCertificate dual;
  double gap = 0.0;
  int iterations = 0;
};

inline const char* to_string(LPResult::Status s) {
  switch (s) {
    case LPResult::Status::optimal: return "optimal";
    case LPResult::Status::iteration_limit: return "iteration_limit";
    case LPResult::Status::infeasible_marginals: return "infeasible_marginals";
  }
  return "unknown";
}

// Minimizes sum_cells w(v) * cost(v) over nonnegative cell masses w whose
// bidder marginals equal the given pmfs.  cost receives the node index
// tuple.  Every product cell is a column and every (bidder, node) pair a
// row, so the returned duals price the full grid, empty nodes included.
template <class CostFn>
LPResult worst_case_coupling(const CostFn& cost,
                             const std::vector<std::vector<double>>& pmfs,
                             std::vector<double> grid,
                             int max_iterations = 0) {
  const int n = static_cast<int>(pmfs.size());
  const int m = static_cast<int>(grid.size());
  if (n < 2) throw std::invalid_argument("worst-case coupling: need n >= 2");
  if (m < 2) throw std::invalid_argument("worst-case coupling: need m >= 2");
  for (const auto& p : pmfs)
    if (static_cast<int>(p.size()) != m)
      throw std::invalid_argument("worst-case coupling: pmf size mismatch");

  std::size_t cells = 1;
  for (int i = 0; i < n; ++i) cells *= static_cast<std::size_t>(m);

  SparseColumns a;
  a.rows = n * m;
  a.cols.resize(cells);
  std::vector<double> c(cells, 0.0);
  std::vector<int> idx(n, 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    auto& col = a.cols[flat];
    col.reserve(n);
    for (int i = 0; i < n; ++i) col.emplace_back(i * m + idx[i], 1.0);
    c[flat] = cost(idx);
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }
  std::vector<double> b(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) b[i * m + k] = pmfs[i][k];

  LpSolution sol = solve_lp_min(a, b, c, max_iterations);

  LPResult out;
  out.iterations = sol.iterations;
  out.coupling = JointGrid(n, grid);
  out.dual.grid = grid;
  out.dual.lambda.assign(n, std::vector<double>(m, 0.0));
  switch (sol.status) {
    case LpSolution::Status::infeasible:
      out.status = LPResult::Status::infeasible_marginals;
      return out;
    case LpSolution::Status::unbounded:
      // Cannot happen: the feasible set is a transportation polytope.
      throw std::runtime_error("worst-case coupling: unbounded LP");
    case LpSolution::Status::iteration_limit:
      out.status = LPResult::Status::iteration_limit;
      break;
    case LpSolution::Status::optimal:
      out.status = LPResult::Status::optimal;
      break;
  }

  std::fill(idx.begin(), idx.end(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    if (sol.x[flat] > 0.0) out.coupling.add(idx, sol.x[flat]);
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) out.dual.lambda[i][k] = sol.y[i * m + k];
  out.primal = sol.objective;
  out.gap = out.primal - out.dual.value_against(pmfs);
  return out;
}

// Worst-case expected revenue of M over all couplings of n copies of F,
// discretized on the m-node grid.  Grid sizes are capped where the dense
// product-cell LP stays tractable.
inline LPResult nature_worst_case(const Mechanism& mech, const Marginal& f,
                                  int n, int m, int max_iterations = 0) {
  if (mech.n() != n)
    throw std::invalid_argument("nature_worst_case: mechanism is for " +
                                std::to_string(mech.n()) + " bidders");
  int cap = 0;
  switch (n) {
    case 2: cap = 400; break;
    case 3: cap = 25; break;
    case 4: cap = 12; break;
    default:
      throw std::invalid_argument(
          "nature_worst_case: n must be 2, 3, or 4 for the LP");
  }
  if (m < 2 || m > cap)
    throw std::invalid_argument("nature_worst_case: grid size " +
                                std::to_string(m) + " outside [2, " +
                                std::to_string(cap) + "] for n = " +
                                std::to_string(n));
  DiscreteMarginal d = discretize(f, m);
  std::vector<std::vector<double>> pmfs(n, d.pmf);
  std::vector<double> v(n);
  auto cost = [&](const std::vector<int>& idx) {
    for (int i = 0; i < n; ++i) v[i] = d.grid[idx[i]];
    return mech.total_payment(v);
  };
  return worst_case_coupling(cost, pmfs, d.grid, max_iterations);
}

// Node prices of the closed-form duals. For the beta-reserve family
// lambda(v) = v^p / n with p = n/(n-1); the capped variant divides by the
// cap's allocation scale below r and is constant r/n above.
inline DualCertificate build_canonical_dual(MechanismKind kind, int n,
                                            std::vector<double> grid,
                                            std::optional<double> cap = {}) {
  if (n < 2) throw std::invalid_argument("canonical dual: need n >= 2");
  const double p = static_cast<double>(n) / (n - 1);
  DualCertificate d;
  d.grid = grid;
  d.lambda.assign(n, std::vector<double>(grid.size(), 0.0));
  auto fill = [&](auto&& one) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double v = grid[k];
      const double lam = v <= 0.0 ? 0.0 : one(v);
      for (int i = 0; i < n; ++i) d.lambda[i][k] = lam;
    }
  };
  switch (kind) {
    case MechanismKind::spa_uniform_reserve:
      if (n != 2)
        throw std::invalid_argument(
            "canonical dual: uniform reserve is the two-bidder case");
      [[fallthrough]];
    case MechanismKind::spa_beta_reserve:
      fill([&](double v) { return std::pow(v, p) / n; });
      return d;
    case MechanismKind::spa_capped_beta: {
      if (!cap || *cap <= 0.0 || *cap > 1.0)
        throw std::invalid_argument("canonical dual: cap must lie in (0, 1]");
      const double r = *cap;
      const double scale = std::pow(r, 1.0 / (n - 1));
      fill([&](double v) {
        return v <= r ? std::pow(v, p) / (n * scale) : r / n;
      });
      return d;
    }
    default:
      throw std::invalid_argument(
          "canonical dual: no closed form for this mechanism kind");
  }
}

// Profiles on which the beta-reserve dual binds: one bidder weakly on top
// with all others tied below, including the all-tied diagonal.
inline bool winner_ray_profile(const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  for (int i = 0; i < n; ++i) {
    bool ok = true;
    int common = -1;
    for (int j = 0; j < n && ok; ++j) {
      if (j == i) continue;
      if (common < 0) common = idx[j];
      ok = idx[j] == common && idx[i] >= common;
    }
    if (ok) return true;
  }
  return false;
}

struct DualReport {
  bool feasible = true;
  double worst_violation = 0.0;  // max over profiles of sum(lambda) - sum(t)
  std::vector<int> worst_profile;
  std::vector<std::vector<int>> tight;
  std::size_t profiles_checked = 0;
};

// Sweeps the full product grid checking sum_i lambda_i(v_i) <= sum_i t_i(v)
// and collecting the profiles where the constraint binds.
inline DualReport verify_dual(const DualCertificate& dual,
                              const Mechanism& mech,
                              double feasibility_tol = 1e-10,
                              double tight_tol = 1e-9) {
  const int n = dual.bidders();
  const int m = static_cast<int>(dual.grid.size());
  if (mech.n() != n)
    throw std::invalid_argument("verify_dual: bidder count mismatch");
  DualReport rep;
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(n, 0);
  std::vector<double> v(n);
  while (true) {
    for (int i = 0; i < n; ++i) v[i] = dual.grid[idx[i]];
    double lam = 0.0;
    for (int i = 0; i < n; ++i) lam += dual.lambda[i][idx[i]];
    const double slack = lam - mech.total_payment(v);
    if (slack > rep.worst_violation) {
      rep.worst_violation = slack;
      rep.worst_profile = idx;
    }
    if (std::abs(slack) <= tight_tol) rep.tight.push_back(idx);
    ++rep.profiles_checked;
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
  rep.feasible = rep.worst_violation <= feasibility_tol;
  return rep;
}

// Upper bound on any single deviating bidder's conditional virtual surplus:
// nature's coupling leaves no profitable monotone response when this is
// (close to) the mechanism's own expected revenue.  Only maximal bidders
// are eligible to win under an exclusive allocation.
inline double best_response_bound(const JointGrid& joint) {
  VirtualField field = virtual_values(joint);
  double bound = 0.0;
  joint.for_each([&](const std::vector<int>& idx, double w) {
    int top = idx[0];
    for (int i : idx) top = std::max(top, i);
    double best = 0.0;
    for (int i = 0; i < joint.n(); ++i)
      if (idx[i] == top) best = std::max(best, field.at(idx, i));
    bound += w * best;
  });
  return bound;
}

}  // namespace cra
