#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cra/adversary.hpp"
#include "cra/config.hpp"
#include "cra/guarantees.hpp"
#include "cra/io.hpp"
#include "cra/marginal.hpp"
#include "cra/mechanism.hpp"
#include "cra/transport.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitConditionFail = 2;
constexpr int kExitInfeasible = 3;

struct CommonFlags {
  std::string config;
  int grid = 0;
  int n = 0;
  std::string out;
  std::string format;
};

void add_common_flags(CLI::App* sub, CommonFlags* flags) {
  sub->add_option("--config", flags->config, "path to a JSON run config");
  sub->add_option("--grid", flags->grid, "value grid size m")
      ->check(CLI::Range(2, 100000));
  sub->add_option("--n", flags->n, "number of bidders")->check(CLI::Range(2, 64));
  sub->add_option("--out", flags->out, "output directory (default .)");
  sub->add_option("--format", flags->format, "artifact format")
      ->check(CLI::IsMember({"json", "csv"}));
}

cra::RunConfig effective_config(const CommonFlags& flags) {
  cra::RunConfig c = flags.config.empty() ? cra::RunConfig{}
                                          : cra::load_run_config(flags.config);
  if (flags.n > 0) c.n_bidders = flags.n;
  if (flags.grid > 0) c.grid_size = flags.grid;
  if (!flags.out.empty()) c.out_dir = flags.out;
  if (!flags.format.empty()) c.format = flags.format;
  if (c.mechanism) (void)c.make_mechanism();  // revalidate under the final n
  return c;
}

const cra::Marginal& need_distribution(const cra::RunConfig& c) {
  if (!c.distribution)
    throw cra::ConfigError("distribution: missing from config");
  return *c.distribution;
}

std::string artifact_path(const cra::RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out_dir);
  return (std::filesystem::path(c.out_dir) / name).string();
}

void write_json_artifact(const cra::RunConfig& c, const std::string& name,
                         const json& j) {
  cra::write_text_file(artifact_path(c, name), j.dump(2) + "\n");
}

int default_lp_grid(int n) { return n == 2 ? 40 : n == 3 ? 15 : 10; }

// ---------------------------------------------------------------- check

int cmd_check(const cra::RunConfig& c) {
  const cra::Marginal& f = need_distribution(c);
  const int n = c.n_bidders;

  std::vector<cra::RegularityReport> reports;
  reports.push_back(cra::check_regularity_2(f));
  if (n >= 3) {
    reports.push_back(cra::check_general_regularity(f, n, 1));
    reports.push_back(cra::check_general_regularity(f, n, 2));
  }
  const bool requested_pass =
      n == 2 ? reports[0].passed()
             : reports[1].passed() || reports[2].passed();

  json out{{"n", n},
           {"requested_condition",
            n == 2 ? "robust_2bidder" : "general_variant_1_or_2"},
           {"requested_pass", requested_pass}};
  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back(cra::regularity_json(r));
    std::printf("condition %-18s %s  (mass slack %.9g, worst violation %.9g at %.6f)\n",
                r.condition_name.c_str(), r.passed() ? "PASS" : "FAIL",
                r.mass_slack, r.worst_violation_magnitude,
                r.worst_violation_location);
  }
  out["reports"] = arr;
  write_json_artifact(c, "check.json", out);
  return requested_pass ? kExitOk : kExitConditionFail;
}

// ------------------------------------------------------------- adversary

std::vector<double> parse_profile(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw cra::ConfigError("--at: expected comma-separated numbers");
    }
  }
  if (v.empty()) throw cra::ConfigError("--at: expected comma-separated numbers");
  return v;
}

const char* stratum_name(cra::AdversarialDensity::Stratum s) {
  using S = cra::AdversarialDensity::Stratum;
  switch (s) {
    case S::off_support: return "off_support";
    case S::origin_atom: return "origin_atom";
    case S::top_atom: return "top_atom";
    case S::diagonal_ray: return "diagonal_ray";
    case S::interior_sheet: return "interior_sheet";
    case S::boundary_edge: return "boundary_edge";
  }
  return "unknown";
}

int report_infeasible(const cra::RunConfig& c, const std::string& artifact,
                      const cra::FeasibilityFailure& fail) {
  json out{{"status", "infeasible"},
           {"kind", fail.kind == cra::FeasibilityFailure::Kind::negative_density
                        ? "negative_density"
                        : "negative_top_atom"},
           {"location", fail.location},
           {"value", fail.value},
           {"message", fail.message()}};
  write_json_artifact(c, artifact, out);
  std::printf("infeasible: %s\n", fail.message().c_str());
  return kExitInfeasible;
}

int cmd_adversary(const cra::RunConfig& c, const std::string& eval_at) {
  const cra::Marginal& f = need_distribution(c);
  const int n = c.n_bidders;
  const int m = c.grid_size > 0 ? c.grid_size : 50;

  auto result = n == 2 ? cra::build_adversarial_2(f, m)
                       : cra::build_adversarial_n(f, n, m);
  if (std::holds_alternative<cra::FeasibilityFailure>(result))
    return report_infeasible(c, "adversary.json",
                             std::get<cra::FeasibilityFailure>(result));
  const cra::AdversarialStructure& st =
      std::get<cra::AdversarialStructure>(result);

  if (!eval_at.empty()) {
    const std::vector<double> at = parse_profile(eval_at);
    if (static_cast<int>(at.size()) != n)
      throw cra::ConfigError("--at: profile must list one value per bidder");
    const auto ev = st.density.evaluate(at);
    json out{{"profile", at},
             {"stratum", stratum_name(ev.stratum)},
             {"value", ev.value}};
    std::printf("%s\n", out.dump().c_str());
    return kExitOk;
  }

  // Fidelity of the grid structure: its marginals must reproduce the
  // discretized distribution.
  const cra::DiscreteMarginal d = cra::discretize(f, m);
  double marginal_error = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::vector<double> got = st.grid.marginal(i);
    for (int k = 0; k < m; ++k)
      marginal_error = std::max(marginal_error, std::abs(got[k] - d.pmf[k]));
  }

  std::ostringstream csv;
  cra::write_joint_csv(st.grid, csv);
  cra::write_text_file(artifact_path(c, "adversarial_coupling.csv"), csv.str());

  json out{{"status", "ok"},
           {"n", n},
           {"grid_size", m},
           {"total_mass", st.grid.total_mass()},
           {"top_atom", st.density.top_atom()},
           {"marginal_error", marginal_error},
           {"coupling_csv", "adversarial_coupling.csv"}};
  write_json_artifact(c, "adversary.json", out);
  std::printf("adversarial structure on %d^%d grid, marginal error %.3g\n", m,
              n, marginal_error);
  return kExitOk;
}

// ------------------------------------------------------------ worst-case

int cmd_worst_case(const cra::RunConfig& c) {
  const cra::Marginal& f = need_distribution(c);
  const cra::Mechanism mech = c.make_mechanism();
  const int n = c.n_bidders;
  const int m = c.grid_size > 0 ? c.grid_size : default_lp_grid(n);

  const cra::LPResult lp = cra::nature_worst_case(mech, f, n, m);
  write_json_artifact(c, "worst_case.json", cra::lp_result_json(lp));
  std::ostringstream csv;
  cra::write_joint_csv(lp.coupling, csv);
  cra::write_text_file(artifact_path(c, "coupling.csv"), csv.str());

  std::printf("worst-case expected revenue %.9g (gap %.3g, %d iterations, %s)\n",
              lp.primal, lp.gap, lp.iterations, cra::to_string(lp.status));
  return lp.status == cra::LPResult::Status::optimal ? kExitOk
                                                     : kExitConditionFail;
}

// ------------------------------------------------------------- guarantee

int cmd_guarantee(const cra::RunConfig& c) {
  const cra::Marginal& f = need_distribution(c);
  const cra::Mechanism mech = c.make_mechanism();
  const int n = c.n_bidders;

  json extra;
  cra::GuaranteeReport rep;
  switch (mech.kind()) {
    case cra::MechanismKind::spa_uniform_reserve:
      rep = cra::guarantee_full_insurance(f);
      break;
    case cra::MechanismKind::spa_beta_reserve:
      rep = cra::guarantee_beta(f, n);
      break;
    case cra::MechanismKind::spa_plain:
      rep = cra::guarantee_spa_plain(f, n);
      break;
    case cra::MechanismKind::posted_price: {
      rep = cra::guarantee_posted_price(f);
      extra["best_known_price"] = rep.parameter;
      break;
    }
    case cra::MechanismKind::spa_deterministic_reserve: {
      const cra::DetReserveGuarantee det =
          cra::guarantee_spa_det_reserve(f, n, c.grid_size);
      rep = det.report;
      extra["best_reserve"] = det.best_reserve;
      extra["fixed_point_available"] = det.fixed_point_available;
      if (det.fixed_point_available) {
        extra["fixed_point_reserve"] = det.fixed_point_reserve;
        extra["fixed_point_value"] = det.fixed_point_value;
      }
      break;
    }
    case cra::MechanismKind::spa_capped_beta: {
      const double r = mech.reserve().r();
      rep.mechanism_tag = "spa_capped_beta";
      rep.value = cra::beta_r_lower_bound(f, n, r);
      rep.parameter = r;
      rep.method = cra::GuaranteeReport::Method::dual_bound;
      rep.validity = cra::GuaranteeReport::Validity::lower_bound;
      // Plot data: the cap bound as a curve in r.
      std::ostringstream curve;
      curve << "r,bound\n";
      for (int k = 1; k <= 100; ++k) {
        const double rr = k / 100.0;
        curve << cra::fmt17(rr) << ","
              << cra::fmt17(cra::beta_r_lower_bound(f, n, rr)) << "\n";
      }
      cra::write_text_file(artifact_path(c, "cap_bound_curve.csv"), curve.str());
      extra["curve_csv"] = "cap_bound_curve.csv";
      break;
    }
    default:
      throw cra::ConfigError(
          "mechanism: no revenue guarantee is implemented for this kind");
  }

  json out = cra::guarantee_json(rep);
  for (auto& item : extra.items()) out[item.key()] = item.value();
  write_json_artifact(c, "guarantee.json", out);
  if (c.format == "csv") {
    std::ostringstream csv;
    cra::write_guarantee_csv({rep}, csv);
    cra::write_text_file(artifact_path(c, "guarantee.csv"), csv.str());
  }
  std::printf("%s guarantee %.9g (%s, %s)\n", rep.mechanism_tag.c_str(),
              rep.value, cra::to_string(rep.method), cra::to_string(rep.validity));
  return kExitOk;
}

// --------------------------------------------------------------- compare

int cmd_compare(const cra::RunConfig& c) {
  const cra::Marginal& f = need_distribution(c);
  const int n = c.n_bidders;
  const cra::DominanceReport rep = cra::dominance_report(f, n, c.grid_size);

  write_json_artifact(c, "compare.json", cra::dominance_json(rep));
  std::ostringstream csv;
  cra::write_guarantee_csv(rep.rows, csv);
  cra::write_text_file(artifact_path(c, "compare.csv"), csv.str());

  for (const cra::GuaranteeReport& row : rep.rows) {
    std::printf("%-26s %12.9f  %-12s %s\n", row.mechanism_tag.c_str(), row.value,
                cra::to_string(row.method), cra::to_string(row.validity));
  }
  std::printf("capped bound at r* = %.6f beats posted price by %.9g%s\n",
              rep.capped_r_star, rep.margin_over_posted,
              rep.strictness_waived ? " (degenerate marginal, strictness waived)"
                                    : "");
  if (rep.det_reserve_available)
    std::printf("capped bound beats the best deterministic reserve by %.9g\n",
                rep.margin_over_det);
  return kExitOk;
}

// ---------------------------------------------------------------- saddle

int cmd_saddle(const cra::RunConfig& c) {
  const cra::Marginal& f = need_distribution(c);
  const int n = c.n_bidders;
  if (n > 4)
    throw cra::ConfigError(
        "saddle: the verification LP supports n = 2, 3, or 4");
  const int m = c.grid_size > 0 ? c.grid_size : (n == 2 ? 60 : 15);
  const double p = static_cast<double>(n) / (n - 1);

  const cra::Mechanism mech = n == 2 ? cra::Mechanism::spa_uniform_reserve()
                                     : cra::Mechanism::spa_beta_reserve(n);
  const double closed = f.moment_power(p);

  auto result = n == 2 ? cra::build_adversarial_2(f, m)
                       : cra::build_adversarial_n(f, n, m);
  if (std::holds_alternative<cra::FeasibilityFailure>(result))
    return report_infeasible(c, "saddle.json",
                             std::get<cra::FeasibilityFailure>(result));
  const cra::AdversarialStructure& st =
      std::get<cra::AdversarialStructure>(result);

  const cra::LPResult lp = cra::nature_worst_case(mech, f, n, m);
  const double h = 1.0 / (m - 1);
  const double disc_bound = 2.0 * p * h;

  const double mech_revenue = cra::expected_payment(mech, st.grid);
  const double response_bound = cra::best_response_bound(st.grid);

  const bool lp_matches = lp.status == cra::LPResult::Status::optimal &&
                          std::abs(lp.primal - closed) <= disc_bound;
  const bool response_matches =
      std::abs(response_bound - mech_revenue) <= disc_bound;
  const bool pass = lp_matches && response_matches;

  json out{{"verdict", pass ? "PASS" : "FAIL"},
           {"n", n},
           {"grid_size", m},
           {"mechanism", mech.kind_name()},
           {"closed_form", closed},
           {"lp", cra::lp_result_json(lp)},
           {"discretization_bound", disc_bound},
           {"mechanism_revenue_on_adversarial", mech_revenue},
           {"best_response_bound", response_bound},
           {"checks",
            {{"lp_matches_closed_form", lp_matches},
             {"best_response_matches_revenue", response_matches}}}};
  write_json_artifact(c, "saddle.json", out);

  std::printf("saddle verdict %s: worst case %.9g vs closed form %.9g "
              "(bound %.3g), best response %.9g vs revenue %.9g\n",
              pass ? "PASS" : "FAIL", lp.primal, closed, disc_bound,
              response_bound, mech_revenue);
  return pass ? kExitOk : kExitConditionFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"correlation-robust auction toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string eval_at;

  CLI::App* check = app.add_subcommand("check", "regularity conditions for a marginal");
  CLI::App* adversary = app.add_subcommand(
      "adversary", "closed-form worst-case correlation structure");
  CLI::App* adversary_eval = adversary->add_subcommand(
      "eval", "evaluate the structure's density at a value profile");
  adversary_eval->fallthrough();  // let --config etc. reach the parent
  adversary_eval
      ->add_option("--at", eval_at, "comma-separated profile v1,v2,...")
      ->required();
  CLI::App* worst = app.add_subcommand(
      "worst-case", "minimize expected revenue over couplings (LP)");
  CLI::App* guarantee =
      app.add_subcommand("guarantee", "revenue guarantee for a mechanism");
  CLI::App* compare =
      app.add_subcommand("compare", "guarantee table and dominance margins");
  CLI::App* saddle = app.add_subcommand(
      "saddle", "verify the mechanism/coupling pair is a saddle point");

  for (CLI::App* sub : {check, adversary, worst, guarantee, compare, saddle})
    add_common_flags(sub, &flags);

  CLI11_PARSE(app, argc, argv);

  try {
    const cra::RunConfig config = effective_config(flags);
    if (check->parsed()) return cmd_check(config);
    if (adversary->parsed()) return cmd_adversary(config, eval_at);
    if (worst->parsed()) return cmd_worst_case(config);
    if (guarantee->parsed()) return cmd_guarantee(config);
    if (compare->parsed()) return cmd_compare(config);
    if (saddle->parsed()) return cmd_saddle(config);
  } catch (const cra::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  }
  return kExitInputError;
}
