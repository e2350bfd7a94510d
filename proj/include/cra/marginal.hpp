#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cra/quadrature.hpp"

namespace cra {

enum class Family {
  equal_revenue,
  truncated_pareto,
  uniform_with_atom,
  piecewise_grid,
  point_mass,
};

// Value distribution on [0, 1]: a density on (0, 1) plus optional atoms at
// the endpoints.  Interior atoms are not representable; point_mass is the
// only degenerate family and is accepted at 0 or 1 only.
class Marginal {
 public:
  static Marginal equal_revenue(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "equal_revenue: alpha must lie in (0,1)");
    Marginal f(Family::equal_revenue);
    f.alpha_ = alpha;
    f.atom1_ = alpha;
    return f;
  }

  static Marginal truncated_pareto(double alpha, double beta) {
    require(alpha > 0.0 && alpha < 1.0,
            "truncated_pareto: alpha must lie in (0,1)");
    require(beta > 0.0, "truncated_pareto: beta must be positive");
    Marginal f(Family::truncated_pareto);
    f.alpha_ = alpha;
    f.beta_ = beta;
    f.atom1_ = std::pow(alpha, beta);
    return f;
  }

  static Marginal uniform_with_atom(double pr_one) {
    require(pr_one >= 0.0 && pr_one < 1.0,
            "uniform_with_atom: atom mass must lie in [0,1)");
    Marginal f(Family::uniform_with_atom);
    f.atom1_ = pr_one;
    return f;
  }

  static Marginal uniform() { return uniform_with_atom(0.0); }

  static Marginal point_mass(double a) {
    require(a == 0.0 || a == 1.0,
            "point_mass: interior atoms are not supported; a must be 0 or 1");
    Marginal f(Family::point_mass);
    f.atom0_ = (a == 0.0) ? 1.0 : 0.0;
    f.atom1_ = 1.0 - f.atom0_;
    return f;
  }

  // Piecewise-constant density: points are K+1 strictly increasing cell
  // edges inside [0,1], masses are the K cell masses.  Total mass including
  // the endpoint atoms must be 1.
  static Marginal piecewise(std::vector<double> points, std::vector<double> masses,
                            double atom_at_zero = 0.0, double atom_at_one = 0.0) {
    require(points.size() >= 2, "piecewise_grid: need at least one cell");
    require(masses.size() + 1 == points.size(),
            "piecewise_grid: masses must have one entry per cell");
    require(points.front() >= 0.0 && points.back() <= 1.0,
            "piecewise_grid: points must lie in [0,1]");
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
      require(points[i + 1] > points[i],
              "piecewise_grid: points must be strictly increasing");
    require(atom_at_zero >= 0.0 && atom_at_one >= 0.0,
            "piecewise_grid: atom masses must be nonnegative");
    double total = atom_at_zero + atom_at_one;
    for (double m : masses) {
      require(m >= 0.0, "piecewise_grid: cell masses must be nonnegative");
      total += m;
    }
    require(std::abs(total - 1.0) <= 1e-9,
            "piecewise_grid: masses and atoms must sum to 1");
    Marginal f(Family::piecewise_grid);
    f.atom0_ = atom_at_zero;
    f.atom1_ = atom_at_one;
    f.edges_ = std::move(points);
    f.cell_mass_ = std::move(masses);
    return f;
  }

  Family family() const { return family_; }
  double atom_at_zero() const { return atom0_; }
  double atom_at_one() const { return atom1_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  // Density of the continuous part at x in (0, 1); zero elsewhere.
  double density(double x) const {
    if (!(x > 0.0 && x < 1.0)) return 0.0;
    switch (family_) {
      case Family::equal_revenue:
        return x > alpha_ ? alpha_ / (x * x) : 0.0;
      case Family::truncated_pareto:
        return x > alpha_ ? beta_ * atom1_ * std::pow(x, -beta_ - 1.0) : 0.0;
      case Family::uniform_with_atom:
        return 1.0 - atom1_;
      case Family::point_mass:
        return 0.0;
      case Family::piecewise_grid: {
        if (x < edges_.front() || x >= edges_.back()) return 0.0;
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        const std::size_t cell = static_cast<std::size_t>(it - edges_.begin()) - 1;
        return cell_mass_[cell] / (edges_[cell + 1] - edges_[cell]);
      }
    }
    return 0.0;
  }

  // Right-continuous CDF.
  double cdf(double x) const {
    if (x < 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (family_ == Family::point_mass) return atom0_;
    return atom0_ + density_interval_moment(0.0, x, 0.0);
  }

  // Left limit F(x-).
  double cdf_left(double x) const {
    if (x <= 0.0) return 0.0;
    if (x > 1.0) return 1.0;
    if (family_ == Family::point_mass) return atom0_;
    return atom0_ + density_interval_moment(0.0, std::min(x, 1.0), 0.0);
  }

  // Smallest x with F(x) >= p; flat CDF regions resolve to the left endpoint.
  double quantile(double p) const {
    require(p >= 0.0 && p <= 1.0, "quantile: p must lie in [0,1]");
    if (p <= atom0_) return 0.0;
    if (p > 1.0 - atom1_) return 1.0;
    const double q = p - atom0_;
    switch (family_) {
      case Family::equal_revenue:
        return std::min(alpha_ / (1.0 - q), 1.0);
      case Family::truncated_pareto:
        return std::min(alpha_ * std::pow(1.0 - q, -1.0 / beta_), 1.0);
      case Family::uniform_with_atom:
        return q / (1.0 - atom1_);
      case Family::point_mass:
        return 1.0;  // only reachable when the atom sits at 1
      case Family::piecewise_grid: {
        double cum = 0.0;
        for (std::size_t i = 0; i < cell_mass_.size(); ++i) {
          if (q <= cum) return edges_[i];
          if (q <= cum + cell_mass_[i]) {
            const double w = edges_[i + 1] - edges_[i];
            return edges_[i] + (q - cum) * w / cell_mass_[i];
          }
          cum += cell_mass_[i];
        }
        return 1.0;
      }
    }
    return 1.0;
  }

  // E[X^p]; atoms contribute 0^p = 0 and 1^p = 1 for p > 0.
  double moment_power(double p) const {
    require(p > 0.0, "moment_power: exponent must be positive");
    return density_interval_moment(0.0, 1.0, p) + atom1_;
  }

  // Integral of x^p over the continuous part restricted to (a, b).
  double density_interval_moment(double a, double b, double p) const {
    switch (family_) {
      case Family::equal_revenue: {
        const double lo = std::max(a, alpha_), hi = std::min(b, 1.0);
        if (hi <= lo) return 0.0;
        if (p == 1.0) return alpha_ * std::log(hi / lo);
        return alpha_ * (std::pow(hi, p - 1.0) - std::pow(lo, p - 1.0)) / (p - 1.0);
      }
      case Family::truncated_pareto: {
        const double lo = std::max(a, alpha_), hi = std::min(b, 1.0);
        if (hi <= lo) return 0.0;
        const double c = beta_ * atom1_;
        if (p == beta_) return c * std::log(hi / lo);
        return c * (std::pow(hi, p - beta_) - std::pow(lo, p - beta_)) / (p - beta_);
      }
      case Family::uniform_with_atom: {
        const double lo = std::max(a, 0.0), hi = std::min(b, 1.0);
        if (hi <= lo) return 0.0;
        return (1.0 - atom1_) * (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) /
               (p + 1.0);
      }
      case Family::point_mass:
        return 0.0;
      case Family::piecewise_grid: {
        double s = 0.0;
        for (std::size_t i = 0; i < cell_mass_.size(); ++i) {
          const double lo = std::max(a, edges_[i]), hi = std::min(b, edges_[i + 1]);
          if (hi <= lo || cell_mass_[i] == 0.0) continue;
          const double d = cell_mass_[i] / (edges_[i + 1] - edges_[i]);
          if (p == 0.0)
            s += d * (hi - lo);
          else
            s += d * (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / (p + 1.0);
        }
        return s;
      }
    }
    return 0.0;
  }

  std::string describe() const {
    switch (family_) {
      case Family::equal_revenue:
        return "equal_revenue(" + std::to_string(alpha_) + ")";
      case Family::truncated_pareto:
        return "truncated_pareto(" + std::to_string(alpha_) + "," +
               std::to_string(beta_) + ")";
      case Family::uniform_with_atom:
        return "uniform_with_atom(" + std::to_string(atom1_) + ")";
      case Family::point_mass:
        return "point_mass(" + std::to_string(atom1_) + ")";
      case Family::piecewise_grid:
        return "piecewise_grid(" + std::to_string(cell_mass_.size()) + " cells)";
    }
    return "";
  }

 private:
  explicit Marginal(Family f) : family_(f) {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  }

  Family family_;
  double alpha_ = 0.0, beta_ = 0.0;
  double atom0_ = 0.0, atom1_ = 0.0;
  std::vector<double> edges_, cell_mass_;
};

struct RegularityReport {
  std::string condition_name;
  bool monotonicity_ok = true;
  double worst_violation_location = 0.0;
  double worst_violation_magnitude = 0.0;
  bool mass_condition_ok = true;
  double mass_slack = 0.0;

  bool passed() const { return monotonicity_ok && mass_condition_ok; }
};

namespace detail {

inline constexpr int kRegularitySamples = 10001;
inline constexpr double kRegularityTol = 1e-9;

// Largest drop of h below its running maximum over samples strictly inside
// (0, 1).  A positive drop beyond tolerance is a monotonicity violation.
template <class H>
void scan_monotone(const H& h, RegularityReport* rep) {
  double running = -1.0;
  double worst = 0.0, where = 0.0;
  for (int i = 0; i < kRegularitySamples; ++i) {
    const double x = static_cast<double>(i + 1) / (kRegularitySamples + 1);
    const double v = h(x);
    if (v > running) running = v;
    const double drop = running - v;
    if (drop > worst) {
      worst = drop;
      where = x;
    }
  }
  rep->monotonicity_ok = worst <= kRegularityTol;
  rep->worst_violation_location = where;
  rep->worst_violation_magnitude = worst;
}

}  // namespace detail

// Two-bidder robust condition: x^2 f(x) non-decreasing on (0,1) and
// Pr(X=1) >= integral of x^2 f(x) dx.
inline RegularityReport check_regularity_2(const Marginal& f) {
  RegularityReport rep;
  rep.condition_name = "robust_2bidder";
  detail::scan_monotone([&](double x) { return x * x * f.density(x); }, &rep);
  rep.mass_slack = f.atom_at_one() - f.density_interval_moment(0.0, 1.0, 2.0);
  rep.mass_condition_ok = rep.mass_slack >= -detail::kRegularityTol;
  return rep;
}

// N-bidder conditions.  Variant 1 is the pointwise density bound
// f(x) >= x^{-1-p}/(N-1) * integral_0^x s^p f(s) ds with p = N/(N-1);
// variant 2 is the stronger x^2 f(x) monotonicity.  Both share the mass
// condition Pr(X=1) >= (1/(N-1)) * integral s^p f(s) ds.
inline RegularityReport check_general_regularity(const Marginal& f, int n,
                                                 int variant) {
  if (n < 2) throw std::invalid_argument("check_general_regularity: n must be >= 2");
  if (variant != 1 && variant != 2)
    throw std::invalid_argument("check_general_regularity: variant must be 1 or 2");
  const double p = static_cast<double>(n) / (n - 1);
  RegularityReport rep;
  rep.condition_name = variant == 1 ? "general_variant_1" : "general_variant_2";
  if (variant == 2) {
    detail::scan_monotone([&](double x) { return x * x * f.density(x); }, &rep);
  } else {
    double worst = 0.0, where = 0.0;
    for (int i = 0; i < detail::kRegularitySamples; ++i) {
      const double x =
          static_cast<double>(i + 1) / (detail::kRegularitySamples + 1);
      const double bound = std::pow(x, -1.0 - p) / (n - 1) *
                           f.density_interval_moment(0.0, x, p);
      const double gap = bound - f.density(x);
      if (gap > worst) {
        worst = gap;
        where = x;
      }
    }
    rep.monotonicity_ok = worst <= detail::kRegularityTol;
    rep.worst_violation_location = where;
    rep.worst_violation_magnitude = worst;
  }
  rep.mass_slack =
      f.atom_at_one() - f.density_interval_moment(0.0, 1.0, p) / (n - 1);
  rep.mass_condition_ok = rep.mass_slack >= -detail::kRegularityTol;
  return rep;
}

// Marginal restricted to m equispaced nodes 0, 1/(m-1), ..., 1.  Node j < m-1
// carries the density mass of the cell [x_j, x_{j+1}); node 0 additionally
// carries the atom at 0 and node m-1 carries exactly the atom at 1.  Partial
// sums through node j therefore equal F(x_{j+1}-).
struct DiscreteMarginal {
  std::vector<double> grid;
  std::vector<double> pmf;

  int size() const { return static_cast<int>(grid.size()); }
  double step() const { return grid[1] - grid[0]; }
};

inline DiscreteMarginal discretize(const Marginal& f, int m) {
  if (m < 2) throw std::invalid_argument("discretize: need at least two grid points");
  DiscreteMarginal d;
  d.grid.resize(m);
  d.pmf.resize(m);
  const int top = m - 1;
  for (int j = 0; j < m; ++j) d.grid[j] = static_cast<double>(j) / top;
  for (int j = 0; j < top; ++j)
    d.pmf[j] = f.density_interval_moment(d.grid[j], d.grid[j + 1], 0.0);
  d.pmf[0] += f.atom_at_zero();
  d.pmf[top] = f.atom_at_one();
  return d;
}

}  // namespace cra
