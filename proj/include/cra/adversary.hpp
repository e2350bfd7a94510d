#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cra/joint_grid.hpp"
#include "cra/marginal.hpp"

namespace cra {

// Witness for an infeasible adversarial construction: the marginal demands a
// negative density along the non-winner ray, or a negative atom at the top
// profile.  Carried as a value so callers can inspect the location instead of
// catching an exception.
struct FeasibilityFailure {
  enum class Kind { negative_density, negative_top_atom };
  Kind kind = Kind::negative_density;
  double location = 0.0;
  double value = 0.0;

  std::string message() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s at v = %.6f (value %.9g)",
                  kind == Kind::negative_density
                      ? "negative adversarial density"
                      : "negative top-atom mass",
                  location, value);
    return buf;
  }
};

// Closed-form description of the worst-case correlation structure for a
// marginal F and n symmetric bidders.  Mass lives on profiles where all
// non-maximal coordinates share one value k: a density sheet for max < 1, an
// edge where the max sits at 1, atoms at the origin and at (1,...,1).
class AdversarialDensity {
 public:
  AdversarialDensity(Marginal f, int n)
      : f_(std::move(f)),
        n_(n),
        power_(static_cast<double>(n) / (n - 1)) {
    if (n < 2) throw std::invalid_argument("AdversarialDensity: n must be >= 2");
  }

  int n() const { return n_; }
  const Marginal& marginal() const { return f_; }
  double power() const { return power_; }

  // Density c(k) of the common non-maximal coordinate, k in (0,1).
  double ray_density(double k) const {
    require_interior(k);
    const double tail = f_.density_interval_moment(0.0, k, power_);
    return (f_.density(k) -
            tail / ((n_ - 1) * std::pow(k, 1.0 + power_))) /
           (n_ - 1);
  }

  // g(k): the accumulated power-moment weight that the ray construction
  // spreads above k.
  double accumulated_weight(double k) const {
    require_interior(k);
    return f_.density_interval_moment(0.0, k, power_) /
           ((n_ - 1) * std::pow(k, 1.0 / (n_ - 1)));
  }

  // Edge density along a maximal coordinate pinned at 1, per winner choice.
  double boundary_density(double low) const {
    require_interior(low);
    return low * ray_density(low);
  }

  double top_atom() const {
    const double atom_at_one = f_.cdf(1.0) - f_.cdf_left(1.0);
    return atom_at_one -
           f_.density_interval_moment(0.0, 1.0, power_) / (n_ - 1);
  }

  enum class Stratum {
    off_support,
    origin_atom,
    top_atom,
    diagonal_ray,
    interior_sheet,
    boundary_edge,
  };

  struct Evaluation {
    Stratum stratum = Stratum::off_support;
    // Sheet strata report a density, edge strata a density per unit of the
    // low coordinate, atom strata a probability mass.
    double value = 0.0;
  };

  Evaluation evaluate(const std::vector<double>& v) const {
    if (v.size() != static_cast<std::size_t>(n_))
      throw std::invalid_argument("AdversarialDensity: profile arity mismatch");
    for (double x : v)
      if (!(x >= 0.0) || x > 1.0)
        throw std::invalid_argument("AdversarialDensity: profile outside [0,1]");
    std::vector<double> s(v);
    std::sort(s.begin(), s.end(), std::greater<double>());
    const double hi = s.front();
    const double lo = s[1];
    for (std::size_t i = 2; i < s.size(); ++i)
      if (s[i] != lo) return {Stratum::off_support, 0.0};

    if (hi == 0.0) return {Stratum::origin_atom, f_.cdf(0.0)};
    if (lo == 1.0) return {Stratum::top_atom, top_atom()};
    if (hi == 1.0)
      return {Stratum::boundary_edge, lo == 0.0 ? 0.0 : boundary_density(lo)};
    if (lo == 0.0) return {Stratum::interior_sheet, 0.0};
    const double sheet = lo * ray_density(lo) / (hi * hi);
    if (hi == lo) return {Stratum::diagonal_ray, sheet};
    return {Stratum::interior_sheet, sheet};
  }

 private:
  void require_interior(double k) const {
    if (!(k > 0.0) || !(k < 1.0))
      throw std::invalid_argument("AdversarialDensity: coordinate must lie in (0,1)");
  }

  Marginal f_;
  int n_;
  double power_;
};

struct AdversarialStructure {
  AdversarialDensity density;
  JointGrid grid;
};

using AdversarialResult = std::variant<AdversarialStructure, FeasibilityFailure>;

namespace detail {

inline std::optional<FeasibilityFailure> feasibility_gate(
    const AdversarialDensity& a) {
  const int samples = 10001;
  double worst = 0.0;
  double worst_k = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double k = static_cast<double>(i) / (samples + 1);
    const double c = a.ray_density(k);
    if (c < worst) {
      worst = c;
      worst_k = k;
    }
  }
  if (worst < -1e-9)
    return FeasibilityFailure{FeasibilityFailure::Kind::negative_density,
                              worst_k, worst};
  const double atom = a.top_atom();
  if (atom < -1e-12)
    return FeasibilityFailure{FeasibilityFailure::Kind::negative_top_atom, 1.0,
                              atom};
  return std::nullopt;
}

// Materializes the structure on the grid directly from the discretized
// marginal.  Each row k (the common non-winner node) gets the unique column
// of winner masses whose discrete virtual value vanishes at every node from
// the diagonal up to one below the top; the row scale is pinned by the
// marginal at node k, net of winner mass already promised by lower rows.
// This reproduces the closed form in the limit and keeps both the marginals
// and the zero-virtual-value property exact at any resolution.
inline std::variant<JointGrid, FeasibilityFailure> materialize(
    const Marginal& f, int n, int m) {
  const DiscreteMarginal d = discretize(f, m);
  const int top = m - 1;
  const double h = d.step();
  const auto& x = d.grid;
  const auto& p = d.pmf;

  JointGrid j(n, d.grid);
  std::vector<int> idx(n);
  if (p[0] > 0.0) {
    std::fill(idx.begin(), idx.end(), 0);
    j.add(idx, p[0]);
  }

  // carried[l]: winner-at-node-l mass already placed by rows below l.
  std::vector<double> carried(m, 0.0);
  std::vector<double> mu(m, 0.0);
  for (int k = 1; k < top; ++k) {
    // Unit-scale column anchored at the top node.
    mu[top] = 1.0;
    double tail = 1.0;
    for (int l = top - 1; l > k; --l) {
      mu[l] = h * tail / x[l];
      tail += mu[l];
    }
    const double diag_hat = h * tail / x[k];
    double above_hat = 0.0;
    for (int l = k + 1; l <= top; ++l) above_hat += mu[l];

    double need = p[k] - carried[k];
    if (need < 0.0) {
      if (need < -1e-9)
        return FeasibilityFailure{FeasibilityFailure::Kind::negative_density,
                                  x[k], need};
      need = 0.0;
    }
    if (need == 0.0) continue;
    const double scale = need / (diag_hat + (n - 1) * above_hat);

    std::fill(idx.begin(), idx.end(), k);
    j.add(idx, scale * diag_hat);
    for (int l = k + 1; l <= top; ++l) {
      const double w = scale * mu[l];
      carried[l] += w;
      for (int i = 0; i < n; ++i) {
        std::fill(idx.begin(), idx.end(), k);
        idx[i] = l;
        j.add(idx, w);
      }
    }
  }

  double atom = p[top] - carried[top];
  if (atom < -1e-9)
    return FeasibilityFailure{FeasibilityFailure::Kind::negative_top_atom, 1.0,
                              atom};
  if (atom > 0.0) {
    std::fill(idx.begin(), idx.end(), top);
    j.add(idx, atom);
  }
  return j;
}

inline AdversarialResult build_adversarial(const Marginal& f, int n, int m) {
  AdversarialDensity a(f, n);
  if (auto fail = feasibility_gate(a)) return *fail;
  auto built = materialize(f, n, m);
  if (std::holds_alternative<FeasibilityFailure>(built))
    return std::get<FeasibilityFailure>(built);
  return AdversarialStructure{std::move(a), std::move(std::get<JointGrid>(built))};
}

}  // namespace detail

inline AdversarialResult build_adversarial_2(const Marginal& f, int m) {
  return detail::build_adversarial(f, 2, m);
}

inline AdversarialResult build_adversarial_n(const Marginal& f, int n, int m) {
  if (n < 3)
    throw std::invalid_argument(
        "build_adversarial_n: n must be >= 3; two bidders use build_adversarial_2");
  return detail::build_adversarial(f, n, m);
}

// One finding per virtual-value anomaly.  error=true marks a violation of
// the two-bidder high/low ordering or a nonzero maximal-bidder virtual value
// below the top node; error=false marks the expected positive virtual value
// of non-maximal bidders with three or more bidders, reported for
// information only.
struct VirtualFinding {
  std::vector<int> cell;
  int bidder = -1;
  double phi = 0.0;
  bool error = false;
  std::string note;
};

inline std::vector<VirtualFinding> interbidder_monotone_check(
    const VirtualField& vf, double tol = 1e-9) {
  std::vector<VirtualFinding> out;
  const int n = vf.n;
  const int top = static_cast<int>(vf.grid.size()) - 1;
  for (const auto& [idx, phi] : vf.phi) {
    const int hi = *std::max_element(idx.begin(), idx.end());
    if (n == 2) {
      const int a = idx[0] >= idx[1] ? 0 : 1;
      const int b = 1 - a;
      if (phi[a] < phi[b] - tol)
        out.push_back({idx, a, phi[a],
                       true, "high bidder virtual value below low bidder's"});
      continue;
    }
    const bool all_top =
        std::all_of(idx.begin(), idx.end(), [&](int v) { return v == top; });
    if (all_top) continue;
    for (int i = 0; i < n; ++i) {
      if (idx[i] == hi) {
        if (hi < top && std::abs(phi[i]) > tol)
          out.push_back({idx, i, phi[i],
                         true, "maximal bidder virtual value not zero"});
      } else if (phi[i] > tol) {
        out.push_back({idx, i, phi[i],
                       false, "non-maximal bidder virtual value positive"});
      }
    }
  }
  return out;
}

}  // namespace cra
