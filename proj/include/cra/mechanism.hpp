#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cra {

inline std::vector<double> make_grid(int m) {
  if (m < 2) throw std::invalid_argument("make_grid: need at least two points");
  std::vector<double> g(m);
  for (int j = 0; j < m; ++j) g[j] = static_cast<double>(j) / (m - 1);
  return g;
}

// Reserve price distribution G on [0, 1], with a closed-form antiderivative
// so Myerson payments never need numeric integration.
class ReserveDistribution {
 public:
  enum class Tag { uniform, beta, capped_beta, degenerate };

  static ReserveDistribution uniform() { return {Tag::uniform, 2, 0.0}; }

  // Beta(1/(n-1), 1): G(x) = x^{1/(n-1)}.  Coincides with uniform at n = 2.
  static ReserveDistribution beta(int n) {
    if (n < 2) throw std::invalid_argument("reserve beta: n must be >= 2");
    return {Tag::beta, n, 0.0};
  }

  // Beta reserve rescaled onto [0, r]: G(x) = (x/r)^{1/(n-1)} below r, 1 above.
  static ReserveDistribution capped_beta(int n, double r) {
    if (n < 2) throw std::invalid_argument("reserve capped_beta: n must be >= 2");
    if (!(r > 0.0 && r <= 1.0))
      throw std::invalid_argument("reserve capped_beta: r must lie in (0,1]");
    return {Tag::capped_beta, n, r};
  }

  static ReserveDistribution degenerate(double r) {
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("reserve degenerate: r must lie in [0,1]");
    return {Tag::degenerate, 2, r};
  }

  Tag tag() const { return tag_; }
  double r() const { return r_; }

  double cdf(double x) const {
    if (x <= 0.0) return tag_ == Tag::degenerate && r_ == 0.0 ? 1.0 : 0.0;
    if (x >= 1.0) return 1.0;
    switch (tag_) {
      case Tag::uniform:
        return x;
      case Tag::beta:
        return std::pow(x, 1.0 / (n_ - 1));
      case Tag::capped_beta:
        return x >= r_ ? 1.0 : std::pow(x / r_, 1.0 / (n_ - 1));
      case Tag::degenerate:
        return x >= r_ ? 1.0 : 0.0;
    }
    return 0.0;
  }

  // Integral of G over [a, b] for 0 <= a <= b <= 1.
  double integral(double a, double b) const {
    if (b <= a) return 0.0;
    switch (tag_) {
      case Tag::uniform:
        return 0.5 * (b * b - a * a);
      case Tag::beta: {
        const double e = static_cast<double>(n_) / (n_ - 1);
        return (std::pow(b, e) - std::pow(a, e)) / e;
      }
      case Tag::capped_beta: {
        const double e = static_cast<double>(n_) / (n_ - 1);
        const double lo = std::min(a, r_), hi = std::min(b, r_);
        double s = (std::pow(hi, e) - std::pow(lo, e)) /
                   (e * std::pow(r_, 1.0 / (n_ - 1)));
        if (b > r_) s += b - std::max(a, r_);
        return s;
      }
      case Tag::degenerate:
        return std::max(0.0, b - std::max(a, r_));
    }
    return 0.0;
  }

  std::string describe() const {
    switch (tag_) {
      case Tag::uniform:
        return "uniform";
      case Tag::beta:
        return "beta(1/" + std::to_string(n_ - 1) + ",1)";
      case Tag::capped_beta:
        return "capped_beta(r=" + std::to_string(r_) + ")";
      case Tag::degenerate:
        return "degenerate(r=" + std::to_string(r_) + ")";
    }
    return "";
  }

 private:
  ReserveDistribution(Tag t, int n, double r) : tag_(t), n_(n), r_(r) {}
  Tag tag_;
  int n_;
  double r_;
};

enum class MechanismKind {
  spa_uniform_reserve,
  spa_beta_reserve,
  spa_capped_beta,
  spa_plain,
  spa_deterministic_reserve,
  posted_price,
  custom_grid,
};

// Direct mechanism for n bidders with values in [0, 1].  SPA kinds allocate
// exclusively to the highest bid (split on ties) with probability G(top bid)
// and charge the Myerson payment implied by that allocation; payments are in
// closed form.  Custom mechanisms are allocation tables on an equispaced
// grid; their payments are the discrete Myerson sums unless a payment table
// is supplied.
class Mechanism {
 public:
  static Mechanism spa_random_reserve(ReserveDistribution g, int n) {
    MechanismKind kind = MechanismKind::spa_plain;
    switch (g.tag()) {
      case ReserveDistribution::Tag::uniform:
        kind = MechanismKind::spa_uniform_reserve;
        break;
      case ReserveDistribution::Tag::beta:
        kind = MechanismKind::spa_beta_reserve;
        break;
      case ReserveDistribution::Tag::capped_beta:
        kind = MechanismKind::spa_capped_beta;
        break;
      case ReserveDistribution::Tag::degenerate:
        kind = g.r() == 0.0 ? MechanismKind::spa_plain
                            : MechanismKind::spa_deterministic_reserve;
        break;
    }
    return Mechanism(kind, n, g);
  }

  static Mechanism spa_uniform_reserve() {
    return spa_random_reserve(ReserveDistribution::uniform(), 2);
  }

  static Mechanism spa_beta_reserve(int n) {
    return spa_random_reserve(ReserveDistribution::beta(n), n);
  }

  static Mechanism spa_capped_beta(int n, double r) {
    return spa_random_reserve(ReserveDistribution::capped_beta(n, r), n);
  }

  static Mechanism spa_plain(int n) {
    return spa_random_reserve(ReserveDistribution::degenerate(0.0), n);
  }

  static Mechanism spa_deterministic_reserve(int n, double r) {
    return spa_random_reserve(ReserveDistribution::degenerate(r), n);
  }

  static Mechanism posted_price(int n, double p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("posted_price: price must lie in [0,1]");
    Mechanism m(MechanismKind::posted_price, n,
                ReserveDistribution::degenerate(p));
    m.price_ = p;
    return m;
  }

  // Allocation tables are indexed lexicographically (bidder 0 slowest).
  // Payments default to the discrete Myerson sums of the tables.
  static Mechanism custom(int n, std::vector<double> grid,
                          std::vector<std::vector<double>> alloc,
                          std::optional<std::vector<std::vector<double>>>
                              payments = std::nullopt) {
    if (n < 2) throw std::invalid_argument("custom mechanism: n must be >= 2");
    if (grid.size() < 2)
      throw std::invalid_argument("custom mechanism: grid too small");
    std::size_t cells = 1;
    for (int i = 0; i < n; ++i) cells *= grid.size();
    if (alloc.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("custom mechanism: one table per bidder");
    for (const auto& t : alloc)
      if (t.size() != cells)
        throw std::invalid_argument("custom mechanism: table size mismatch");
    for (std::size_t c = 0; c < cells; ++c) {
      double sum = 0.0;
      for (const auto& t : alloc) {
        if (!(t[c] >= 0.0 && t[c] <= 1.0))
          throw std::invalid_argument(
              "custom mechanism: allocations must lie in [0,1]");
        sum += t[c];
      }
      if (sum > 1.0 + 1e-12)
        throw std::invalid_argument(
            "custom mechanism: allocations must sum to at most 1");
    }
    if (payments) {
      if (payments->size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("custom mechanism: one payment table per bidder");
      for (const auto& t : *payments)
        if (t.size() != cells)
          throw std::invalid_argument("custom mechanism: payment table size mismatch");
    }
    Mechanism m(MechanismKind::custom_grid, n,
                ReserveDistribution::degenerate(0.0));
    m.grid_ = std::move(grid);
    m.alloc_ = std::move(alloc);
    m.payments_ = std::move(payments);
    return m;
  }

  int n() const { return n_; }
  MechanismKind kind() const { return kind_; }
  const ReserveDistribution& reserve() const { return g_; }
  double price() const { return price_; }

  std::string kind_name() const {
    switch (kind_) {
      case MechanismKind::spa_uniform_reserve: return "spa_uniform_reserve";
      case MechanismKind::spa_beta_reserve: return "spa_beta_reserve";
      case MechanismKind::spa_capped_beta: return "spa_capped_beta";
      case MechanismKind::spa_plain: return "spa_plain";
      case MechanismKind::spa_deterministic_reserve:
        return "spa_deterministic_reserve";
      case MechanismKind::posted_price: return "posted_price";
      case MechanismKind::custom_grid: return "custom_grid";
    }
    return "";
  }

  std::vector<double> allocation(const std::vector<double>& v) const {
    check_profile(v);
    std::vector<double> q(n_, 0.0);
    if (kind_ == MechanismKind::custom_grid) {
      const std::size_t idx = cell_index(v);
      for (int i = 0; i < n_; ++i) q[i] = alloc_[i][idx];
      return q;
    }
    if (kind_ == MechanismKind::posted_price) {
      for (int i = 0; i < n_; ++i) {
        if (v[i] >= price_) {
          q[i] = 1.0;
          break;
        }
      }
      return q;
    }
    const double top = *std::max_element(v.begin(), v.end());
    int ties = 0;
    for (double x : v) ties += (x == top);
    const double share = g_.cdf(top) / ties;
    for (int i = 0; i < n_; ++i)
      if (v[i] == top) q[i] = share;
    return q;
  }

  // Payment charged to bidder i; the Myerson formula of the allocation rule.
  double myerson_payment(const std::vector<double>& v, int i) const {
    check_profile(v);
    if (i < 0 || i >= n_)
      throw std::invalid_argument("myerson_payment: bidder index out of range");
    switch (kind_) {
      case MechanismKind::custom_grid:
        return custom_payment(v, i);
      case MechanismKind::posted_price: {
        for (int j = 0; j < i; ++j)
          if (v[j] >= price_) return 0.0;
        return v[i] >= price_ ? price_ : 0.0;
      }
      default: {
        double others = 0.0;
        int ties = 0;
        for (int j = 0; j < n_; ++j) {
          if (j == i) continue;
          others = std::max(others, v[j]);
        }
        if (v[i] < others) return 0.0;
        for (int j = 0; j < n_; ++j) ties += (v[j] == v[i]);
        if (v[i] == others) return v[i] * g_.cdf(v[i]) / ties;
        return v[i] * g_.cdf(v[i]) - g_.integral(others, v[i]);
      }
    }
  }

  std::vector<double> payments(const std::vector<double>& v) const {
    std::vector<double> t(n_);
    for (int i = 0; i < n_; ++i) t[i] = myerson_payment(v, i);
    return t;
  }

  double total_payment(const std::vector<double>& v) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += myerson_payment(v, i);
    return s;
  }

  const std::vector<double>& custom_grid_nodes() const { return grid_; }

 private:
  Mechanism(MechanismKind k, int n, ReserveDistribution g)
      : kind_(k), n_(n), g_(g) {
    if (n < 2) throw std::invalid_argument("mechanism: n must be >= 2");
    if (k == MechanismKind::spa_uniform_reserve && n != 2)
      throw std::invalid_argument("spa_uniform_reserve: defined for n = 2");
  }

  void check_profile(const std::vector<double>& v) const {
    if (v.size() != static_cast<std::size_t>(n_))
      throw std::invalid_argument("profile size does not match bidder count");
    for (double x : v)
      if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("profile values must lie in [0,1]");
  }

  int grid_index(double x) const {
    const int m = static_cast<int>(grid_.size());
    const int j = static_cast<int>(std::lround(x * (m - 1)));
    if (j < 0 || j >= m || std::abs(grid_[j] - x) > 1e-12)
      throw std::invalid_argument("custom mechanism: profile value off the grid");
    return j;
  }

  std::size_t cell_index(const std::vector<double>& v) const {
    std::size_t idx = 0;
    for (int i = 0; i < n_; ++i) idx = idx * grid_.size() + grid_index(v[i]);
    return idx;
  }

  // Discrete Myerson payment: t_i(v) = v_i q_i(v) - sum_{s < v_i} q_i(s, v_-i) h.
  // Left Riemann weights make this the exact integral of the step allocation.
  double custom_payment(const std::vector<double>& v, int i) const {
    if (payments_) return (*payments_)[i][cell_index(v)];
    const double h = grid_[1] - grid_[0];
    const int ji = grid_index(v[i]);
    std::vector<double> w = v;
    double below = 0.0;
    double run_max = -1.0, run_loc = 0.0, qv = 0.0;
    for (int s = 0; s <= ji; ++s) {
      w[i] = grid_[s];
      const double qs = alloc_[i][cell_index(w)];
      if (qs < run_max - 1e-12)
        throw std::runtime_error(
            "custom mechanism: allocation for bidder " + std::to_string(i) +
            " decreases between own values " + std::to_string(run_loc) +
            " and " + std::to_string(grid_[s]));
      if (qs > run_max) {
        run_max = qs;
        run_loc = grid_[s];
      }
      if (s < ji) below += qs * h;
      qv = qs;
    }
    return v[i] * qv - below;
  }

  MechanismKind kind_;
  int n_;
  ReserveDistribution g_;
  double price_ = 0.0;
  std::vector<double> grid_;
  std::vector<std::vector<double>> alloc_;
  std::optional<std::vector<std::vector<double>>> payments_;
};

struct MechanismViolation {
  std::string what;
  int bidder = 0;
  std::vector<double> profile;
  double misreport = 0.0;
  double magnitude = 0.0;
};

namespace detail {

// Enumerate grid^n profiles, calling fn(profile, indices).
template <class Fn>
void for_each_profile(const std::vector<double>& grid, int n, const Fn& fn) {
  const int m = static_cast<int>(grid.size());
  std::vector<int> idx(n, 0);
  std::vector<double> v(n, grid[0]);
  while (true) {
    fn(v, idx);
    int k = n - 1;
    while (k >= 0 && idx[k] == m - 1) {
      idx[k] = 0;
      v[k] = grid[0];
      --k;
    }
    if (k < 0) return;
    ++idx[k];
    v[k] = grid[idx[k]];
  }
}

}  // namespace detail

// Truthfulness on the grid: reporting any other grid value never helps.
inline std::vector<MechanismViolation> check_dsic(const Mechanism& mech, int m,
                                                  double tol = 1e-9,
                                                  std::size_t max_reports = 64) {
  const auto grid = make_grid(m);
  std::vector<MechanismViolation> out;
  detail::for_each_profile(grid, mech.n(), [&](const std::vector<double>& v,
                                               const std::vector<int>&) {
    if (out.size() >= max_reports) return;
    for (int i = 0; i < mech.n(); ++i) {
      const double truthful =
          v[i] * mech.allocation(v)[i] - mech.myerson_payment(v, i);
      std::vector<double> w = v;
      for (double r : grid) {
        if (r == v[i]) continue;
        w[i] = r;
        const double dev = v[i] * mech.allocation(w)[i] - mech.myerson_payment(w, i);
        if (dev > truthful + tol) {
          out.push_back({"dsic", i, v, r, dev - truthful});
          break;
        }
      }
    }
  });
  return out;
}

// Ex-post individual rationality: payment never exceeds value times allocation.
inline std::vector<MechanismViolation> check_epir(const Mechanism& mech, int m,
                                                  double tol = 1e-9,
                                                  std::size_t max_reports = 64) {
  const auto grid = make_grid(m);
  std::vector<MechanismViolation> out;
  detail::for_each_profile(grid, mech.n(), [&](const std::vector<double>& v,
                                               const std::vector<int>&) {
    if (out.size() >= max_reports) return;
    const auto q = mech.allocation(v);
    for (int i = 0; i < mech.n(); ++i) {
      const double slack = v[i] * q[i] - mech.myerson_payment(v, i);
      if (slack < -tol) out.push_back({"epir", i, v, v[i], -slack});
    }
  });
  return out;
}

// Exclusivity: only maximal bidders may receive positive allocation.
inline std::vector<MechanismViolation> check_exclusive(
    const Mechanism& mech, int m, double tol = 1e-12,
    std::size_t max_reports = 64) {
  const auto grid = make_grid(m);
  std::vector<MechanismViolation> out;
  detail::for_each_profile(grid, mech.n(), [&](const std::vector<double>& v,
                                               const std::vector<int>&) {
    if (out.size() >= max_reports) return;
    const double top = *std::max_element(v.begin(), v.end());
    const auto q = mech.allocation(v);
    for (int i = 0; i < mech.n(); ++i)
      if (q[i] > tol && v[i] < top)
        out.push_back({"exclusive", i, v, v[i], q[i]});
  });
  return out;
}

// Allocation monotone in own bid, others fixed.
inline std::vector<MechanismViolation> check_monotone(
    const Mechanism& mech, int m, double tol = 1e-9,
    std::size_t max_reports = 64) {
  const auto grid = make_grid(m);
  std::vector<MechanismViolation> out;
  detail::for_each_profile(grid, mech.n(), [&](const std::vector<double>& v,
                                               const std::vector<int>& idx) {
    if (out.size() >= max_reports) return;
    for (int i = 0; i < mech.n(); ++i) {
      if (idx[i] + 1 >= m) continue;
      std::vector<double> w = v;
      w[i] = grid[idx[i] + 1];
      const double drop = mech.allocation(v)[i] - mech.allocation(w)[i];
      if (drop > tol) out.push_back({"monotone", i, v, w[i], drop});
    }
  });
  return out;
}

}  // namespace cra
