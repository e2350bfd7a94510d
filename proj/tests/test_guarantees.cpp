#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "cra/guarantees.hpp"
#include "cra/marginal.hpp"
#include "cra/mechanism.hpp"
#include "cra/transport.hpp"

using cra::DominanceReport;
using cra::GuaranteeReport;
using cra::Marginal;
using cra::Mechanism;

namespace {

// n*alpha - (n-1)*alpha^{n/(n-1)}, the equal-revenue power moment.
double er_power_moment(double alpha, int n) {
  const double p = static_cast<double>(n) / (n - 1);
  return n * alpha - (n - 1) * std::pow(alpha, p);
}

Marginal random_piecewise(std::mt19937& rng, bool with_top_atom) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double a = 0.15 + 0.30 * u01(rng);
  const double b = a + 0.10 + (0.85 - a - 0.10) * u01(rng);
  double w1 = 0.05 + 0.95 * u01(rng);
  double w2 = 0.05 + 0.95 * u01(rng);
  double w3 = 0.05 + 0.95 * u01(rng);
  const double atom1 = with_top_atom ? 0.05 + 0.25 * u01(rng) : 0.0;
  const double scale = (1.0 - atom1) / (w1 + w2 + w3);
  return Marginal::piecewise({0.0, a, b, 1.0},
                             {w1 * scale, w2 * scale, w3 * scale}, 0.0, atom1);
}

}  // namespace

TEST_CASE("full insurance guarantee is the second moment") {
  const GuaranteeReport er = cra::guarantee_full_insurance(Marginal::equal_revenue(0.5));
  CHECK(er.mechanism_tag == "spa_uniform_reserve");
  CHECK(std::abs(er.value - 0.75) < 1e-9);
  CHECK(er.method == GuaranteeReport::Method::closed_form);
  CHECK(er.validity == GuaranteeReport::Validity::exact);

  CHECK(std::abs(cra::guarantee_full_insurance(Marginal::uniform()).value -
                 1.0 / 3.0) < 1e-9);
  CHECK(std::abs(cra::guarantee_full_insurance(Marginal::point_mass(1.0)).value -
                 1.0) < 1e-12);
  CHECK(std::abs(cra::guarantee_full_insurance(Marginal::uniform_with_atom(0.3)).value -
                 (0.7 / 3.0 + 0.3)) < 1e-9);
}

TEST_CASE("beta reserve guarantee and its validity gate") {
  const GuaranteeReport er2 = cra::guarantee_beta(Marginal::equal_revenue(0.5), 2);
  CHECK(er2.mechanism_tag == "spa_beta_reserve");
  CHECK(std::abs(er2.value - er_power_moment(0.5, 2)) < 1e-9);
  CHECK(er2.validity == GuaranteeReport::Validity::exact);
  CHECK(er2.method == GuaranteeReport::Method::closed_form);

  const GuaranteeReport er3 = cra::guarantee_beta(Marginal::equal_revenue(0.5), 3);
  CHECK(std::abs(er3.value - er_power_moment(0.5, 3)) < 1e-9);
  CHECK(er3.validity == GuaranteeReport::Validity::exact);

  const GuaranteeReport er4 = cra::guarantee_beta(Marginal::equal_revenue(0.3), 4);
  CHECK(std::abs(er4.value - er_power_moment(0.3, 4)) < 1e-9);

  // Uniform marginals put no mass at the top, so the distribution-free dual
  // is the only justification and the value downgrades to a lower bound.
  const GuaranteeReport u3 = cra::guarantee_beta(Marginal::uniform(), 3);
  CHECK(std::abs(u3.value - 0.4) < 1e-9);
  CHECK(u3.validity == GuaranteeReport::Validity::lower_bound);
  CHECK(u3.method == GuaranteeReport::Method::dual_bound);

  const GuaranteeReport u2 = cra::guarantee_beta(Marginal::uniform(), 2);
  CHECK(std::abs(u2.value - 1.0 / 3.0) < 1e-9);
  CHECK(u2.validity == GuaranteeReport::Validity::lower_bound);

  for (int n = 2; n <= 6; ++n) {
    const double expected = (n - 1.0) / (2.0 * n - 1.0);
    CHECK(std::abs(cra::guarantee_beta(Marginal::uniform(), n).value - expected) <
          1e-9);
  }

  const GuaranteeReport pm = cra::guarantee_beta(Marginal::point_mass(1.0), 3);
  CHECK(std::abs(pm.value - 1.0) < 1e-12);
  CHECK(pm.validity == GuaranteeReport::Validity::exact);

  CHECK_THROWS_AS(cra::guarantee_beta(Marginal::uniform(), 1),
                  std::invalid_argument);

  // At two bidders the Beta reserve is the uniform reserve, so the two
  // guarantees must coincide.
  for (const Marginal& f :
       {Marginal::uniform(), Marginal::equal_revenue(0.4),
        Marginal::uniform_with_atom(0.25), Marginal::truncated_pareto(0.4, 0.8),
        Marginal::point_mass(1.0)}) {
    CHECK(std::abs(cra::guarantee_beta(f, 2).value -
                   cra::guarantee_full_insurance(f).value) < 1e-12);
  }
}

TEST_CASE("posted price maximizes price times upper tail") {
  const GuaranteeReport u = cra::guarantee_posted_price(Marginal::uniform());
  CHECK(u.mechanism_tag == "posted_price");
  CHECK(std::abs(u.value - 0.25) < 1e-8);
  CHECK(std::abs(u.parameter - 0.5) < 1e-5);

  // Equal revenue is flat above alpha; ties resolve toward the larger price,
  // and the atom at one keeps the revenue there.
  const GuaranteeReport er = cra::guarantee_posted_price(Marginal::equal_revenue(0.3));
  CHECK(std::abs(er.value - 0.3) < 1e-9);
  CHECK(std::abs(er.parameter - 1.0) < 1e-9);

  const GuaranteeReport pm = cra::guarantee_posted_price(Marginal::point_mass(1.0));
  CHECK(std::abs(pm.value - 1.0) < 1e-12);
  CHECK(std::abs(pm.parameter - 1.0) < 1e-9);

  // x * (1 - 0.7 x) peaks at 5/7 with value 5/14; the atom branch at x = 1
  // only collects 0.3.
  const GuaranteeReport ua = cra::guarantee_posted_price(Marginal::uniform_with_atom(0.3));
  CHECK(std::abs(ua.value - 5.0 / 14.0) < 1e-8);
  CHECK(std::abs(ua.parameter - 5.0 / 7.0) < 1e-4);
}

TEST_CASE("plain second price auction guarantee") {
  for (int n = 2; n <= 6; ++n) {
    const double expected = (n - 1.0) / (2.0 * n);
    CHECK(std::abs(cra::guarantee_spa_plain(Marginal::uniform(), n).value -
                   expected) < 1e-12);
  }

  // Lowest half of the equal-revenue mass: 2 * alpha * log(1/alpha).
  const GuaranteeReport er = cra::guarantee_spa_plain(Marginal::equal_revenue(0.5), 2);
  CHECK(std::abs(er.value - std::log(2.0)) < 1e-9);

  CHECK(std::abs(cra::guarantee_spa_plain(Marginal::point_mass(1.0), 3).value -
                 1.0) < 1e-12);

  // Atom at one: the 1/2-quantile sits at 5/7 inside the density part.
  const GuaranteeReport ua = cra::guarantee_spa_plain(Marginal::uniform_with_atom(0.3), 2);
  CHECK(std::abs(ua.value - 2.0 * 0.7 * 0.5 * (5.0 / 7.0) * (5.0 / 7.0)) < 1e-9);

  CHECK_THROWS_AS(cra::guarantee_spa_plain(Marginal::uniform(), 1),
                  std::invalid_argument);

  // The coupling LP should approach the closed form from below as the grid
  // refines (left-node discretization only lowers payments).
  const auto coarse = cra::nature_worst_case(Mechanism::spa_plain(2),
                                             Marginal::uniform(), 2, 21);
  const auto fine = cra::nature_worst_case(Mechanism::spa_plain(2),
                                           Marginal::uniform(), 2, 41);
  REQUIRE(coarse.status == cra::LPResult::Status::optimal);
  REQUIRE(fine.status == cra::LPResult::Status::optimal);
  CHECK(fine.primal <= 0.25 + 1e-9);
  CHECK(std::abs(fine.primal - 0.25) < 0.02);
  CHECK(std::abs(fine.primal - 0.25) <= std::abs(coarse.primal - 0.25) + 1e-9);
}

TEST_CASE("deterministic reserve guarantee, both methods") {
  const cra::DetReserveGuarantee u =
      cra::guarantee_spa_det_reserve(Marginal::uniform(), 2, 40);
  CHECK(u.report.mechanism_tag == "spa_deterministic_reserve");
  CHECK(u.report.method == GuaranteeReport::Method::lp_estimate);
  CHECK(u.report.validity == GuaranteeReport::Validity::lower_bound);
  // Continuum optimum is 1/3 at reserve 1/3; the grid estimate sits below.
  CHECK(u.report.value <= 1.0 / 3.0 + 1e-9);
  CHECK(std::abs(u.report.value - 1.0 / 3.0) < 0.03);
  CHECK(std::abs(u.best_reserve - 1.0 / 3.0) < 0.1);
  REQUIRE(u.fixed_point_available);
  CHECK(std::abs(u.fixed_point_reserve - 1.0 / 3.0) < 1e-6);
  CHECK(std::abs(u.fixed_point_value - 1.0 / 3.0) < 1e-8);
  CHECK(u.report.crosscheck_residual < 0.03);

  // Point mass at one: every reserve collects one.  The fixed-point recipe
  // lands on a jump and reports a value above one; the residual surfaces
  // the disagreement rather than reconciling it.
  const cra::DetReserveGuarantee pm =
      cra::guarantee_spa_det_reserve(Marginal::point_mass(1.0), 2, 16);
  CHECK(std::abs(pm.report.value - 1.0) < 1e-9);
  if (pm.fixed_point_available) {
    CHECK(pm.report.crosscheck_residual > 0.5);
  }

  const cra::DetReserveGuarantee er =
      cra::guarantee_spa_det_reserve(Marginal::equal_revenue(0.5), 2, 30);
  CHECK(er.report.value > 0.4);
  CHECK(er.report.value <= 0.75 + 1e-9);

  const cra::DetReserveGuarantee u3 =
      cra::guarantee_spa_det_reserve(Marginal::uniform(), 3, 10);
  CHECK(u3.report.value <= 0.375 + 1e-9);
  CHECK(std::abs(u3.report.value - 0.375) < 0.1);

  CHECK_THROWS_AS(cra::guarantee_spa_det_reserve(Marginal::uniform(), 5),
                  std::invalid_argument);
}

TEST_CASE("cap bound quadrature") {
  for (double r : {0.25, 0.5, 0.75, 1.0}) {
    const double closed = r * r / 3.0 + r - r * r;
    CHECK(std::abs(cra::beta_r_lower_bound(Marginal::uniform(), 2, r) - closed) <
          1e-9);
  }
  CHECK(std::abs(cra::beta_r_lower_bound(Marginal::uniform(), 2, 1.0) -
                 1.0 / 3.0) < 1e-9);

  for (double r : {0.3, 0.99}) {
    CHECK(std::abs(cra::beta_r_lower_bound(Marginal::point_mass(1.0), 2, r) - r) <
          1e-12);
  }
  CHECK(std::abs(cra::beta_r_lower_bound(Marginal::point_mass(1.0), 2, 1.0) -
                 1.0) < 1e-12);

  // Equal revenue at alpha = 1/2, cap 0.6: alpha (r - alpha) / r + alpha.
  const double er_closed = 0.5 * (0.6 - 0.5) / 0.6 + 0.5;
  CHECK(std::abs(cra::beta_r_lower_bound(Marginal::equal_revenue(0.5), 2, 0.6) -
                 er_closed) < 1e-9);
  // Cap one includes the top atom in the integral: the full power moment.
  CHECK(std::abs(cra::beta_r_lower_bound(Marginal::equal_revenue(0.5), 2, 1.0) -
                 0.75) < 1e-9);

  CHECK_THROWS_AS(cra::beta_r_lower_bound(Marginal::uniform(), 2, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(cra::beta_r_lower_bound(Marginal::uniform(), 2, -0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(cra::beta_r_lower_bound(Marginal::uniform(), 2, 1.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(cra::beta_r_lower_bound(Marginal::uniform(), 1, 0.5),
                  std::invalid_argument);
}

TEST_CASE("optimizing the cap") {
  const auto [ru, vu] = cra::optimize_r_star(Marginal::uniform(), 2);
  CHECK(std::abs(ru - 0.75) < 1e-6);
  CHECK(std::abs(vu - 0.375) < 1e-9);

  // Uniform at three bidders: bound r - 0.6 r^2, peak 5/12 at cap 5/6.
  const auto [r3, v3] = cra::optimize_r_star(Marginal::uniform(), 3);
  CHECK(std::abs(r3 - 5.0 / 6.0) < 1e-5);
  CHECK(std::abs(v3 - 5.0 / 12.0) < 1e-9);
  CHECK(v3 > cra::guarantee_beta(Marginal::uniform(), 3).value + 1e-3);

  const auto [rp, vp] = cra::optimize_r_star(Marginal::point_mass(1.0), 2);
  CHECK(rp == 1.0);
  CHECK(std::abs(vp - 1.0) < 1e-12);

  const auto [re, ve] = cra::optimize_r_star(Marginal::equal_revenue(0.5), 2);
  CHECK(std::abs(re - 1.0) < 1e-9);
  CHECK(std::abs(ve - 0.75) < 1e-9);
}

TEST_CASE("cap bound stays below the coupling LP on the grid") {
  const std::vector<Marginal> marginals = {
      Marginal::uniform(), Marginal::uniform_with_atom(0.3),
      Marginal::equal_revenue(0.5), Marginal::truncated_pareto(0.4, 0.8),
      Marginal::piecewise({0.0, 0.3, 0.8, 1.0}, {0.2, 0.5, 0.2}, 0.0, 0.1)};
  const int m = 30;
  for (const Marginal& f : marginals) {
    const cra::DiscreteMarginal d = cra::discretize(f, m);
    for (double r : {0.25, 0.5, 0.75, 1.0}) {
      const auto lp =
          cra::nature_worst_case(Mechanism::spa_capped_beta(2, r), f, 2, m);
      REQUIRE(lp.status == cra::LPResult::Status::optimal);
      // Grid version of the cap bound: the canonical dual priced at the
      // discrete marginal.  Weak duality makes it a hard floor for the LP.
      const cra::DualCertificate dual = cra::build_canonical_dual(
          cra::MechanismKind::spa_capped_beta, 2, d.grid, r);
      const double lower = dual.value_against(d);
      CHECK(lower <= lp.primal + 1e-9);
      // The continuum quadrature should track its grid counterpart and the
      // LP within the discretization window.
      const double continuum = cra::beta_r_lower_bound(f, 2, r);
      CHECK(std::abs(continuum - lower) < 0.06);
      CHECK(continuum <= lp.primal + 0.06);
    }
  }
}

TEST_CASE("dominance report on the standard marginals") {
  const DominanceReport u = cra::dominance_report(Marginal::uniform(), 2, 40);
  REQUIRE(u.rows.size() == 5);
  CHECK(u.rows[0].mechanism_tag == "posted_price");
  CHECK(u.rows[1].mechanism_tag == "spa_plain");
  CHECK(u.rows[2].mechanism_tag == "spa_deterministic_reserve");
  CHECK(u.rows[3].mechanism_tag == "spa_beta_reserve");
  CHECK(u.rows[4].mechanism_tag == "spa_capped_beta");
  CHECK(std::abs(u.capped_bound - 0.375) < 1e-9);
  CHECK(std::abs(u.capped_r_star - 0.75) < 1e-6);
  CHECK(std::abs(u.posted_value - 0.25) < 1e-8);
  CHECK(u.dominates_posted_strictly);
  CHECK(u.det_reserve_available);
  CHECK(u.dominates_det_strictly);
  CHECK(u.margin_over_det > 0.03);
  CHECK(std::abs(u.margin_over_posted - 0.125) < 1e-6);
  CHECK(u.revenue_concave);
  CHECK(u.beta_weakly_dominates_posted);
  CHECK(!u.strictness_waived);

  const DominanceReport er = cra::dominance_report(Marginal::equal_revenue(0.5), 2, 24);
  CHECK(std::abs(er.capped_bound - 0.75) < 1e-9);
  CHECK(er.dominates_posted_strictly);
  CHECK(er.dominates_det_strictly);
  CHECK(er.revenue_concave);
  CHECK(er.beta_weakly_dominates_posted);

  // Degenerate marginal: every mechanism collects one; strictness is waived
  // rather than asserted.
  const DominanceReport pm = cra::dominance_report(Marginal::point_mass(1.0), 2, 16);
  CHECK(pm.strictness_waived);
  CHECK(!pm.dominates_posted_strictly);
  for (const GuaranteeReport& row : pm.rows) {
    CHECK(std::abs(row.value - 1.0) < 1e-9);
  }

  // Five bidders: the reserve sweep needs the LP and is skipped.
  const DominanceReport u5 = cra::dominance_report(Marginal::uniform(), 5);
  CHECK(!u5.det_reserve_available);
  CHECK(u5.rows.size() == 4);
  CHECK(u5.dominates_posted_strictly);
  CHECK(!u5.dominates_det_strictly);
}

TEST_CASE("strict dominance holds on randomized marginals") {
  std::mt19937 rng(20260814u);
  for (int rep = 0; rep < 20; ++rep) {
    const Marginal f = random_piecewise(rng, rep % 2 == 0);
    const DominanceReport rep_out = cra::dominance_report(f, 2, 24);
    INFO("rep " << rep);
    CHECK(!rep_out.strictness_waived);
    CHECK(rep_out.dominates_posted_strictly);
    CHECK(rep_out.dominates_det_strictly);

    // The cap bound evaluated at the posted price already beats the posted
    // guarantee whenever mass lies strictly below the price.
    const double x_star = rep_out.rows[0].parameter;
    const double posted = rep_out.rows[0].value;
    if (f.density_interval_moment(0.0, x_star, 2.0) > 1e-9) {
      CHECK(cra::beta_r_lower_bound(f, 2, x_star) > posted + 1e-9);
    }
    if (rep_out.revenue_concave) {
      CHECK(rep_out.beta_weakly_dominates_posted);
    }
  }
}

TEST_CASE("revenue concavity flag") {
  CHECK(cra::revenue_function_concave(Marginal::uniform()));
  CHECK(cra::revenue_function_concave(Marginal::equal_revenue(0.5)));
  CHECK(cra::revenue_function_concave(Marginal::uniform_with_atom(0.3)));
  // Mass bunched low makes price times tail dip and then flatten out:
  // convex stretch past the first segment.
  CHECK(!cra::revenue_function_concave(
      Marginal::piecewise({0.0, 0.5, 1.0}, {0.9, 0.1})));
}
