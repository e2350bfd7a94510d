#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cra/guarantees.hpp"
#include "cra/joint_grid.hpp"
#include "cra/marginal.hpp"
#include "cra/transport.hpp"

namespace cra {

// 17 significant digits: enough to round-trip any double bit-exactly.
inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Columns i1..iN, v1..vN, mass; one row per populated cell, lexicographic
// cell order, LF line endings.
inline void write_joint_csv(const JointGrid& joint, std::ostream& os) {
  const int n = joint.n();
  for (int i = 1; i <= n; ++i) os << "i" << i << ",";
  for (int i = 1; i <= n; ++i) os << "v" << i << ",";
  os << "mass\n";
  joint.for_each([&](const std::vector<int>& idx, double mass) {
    for (int i : idx) os << i << ",";
    for (int i : idx) os << fmt17(joint.grid()[i]) << ",";
    os << fmt17(mass) << "\n";
  });
}

inline nlohmann::json lp_result_json(const LPResult& lp) {
  return nlohmann::json{{"primal", lp.primal},
                        {"dual_value", lp.primal - lp.gap},
                        {"gap", lp.gap},
                        {"status", to_string(lp.status)},
                        {"iterations", lp.iterations}};
}

inline nlohmann::json regularity_json(const RegularityReport& r) {
  return nlohmann::json{{"condition", r.condition_name},
                        {"monotonicity_ok", r.monotonicity_ok},
                        {"worst_violation_location", r.worst_violation_location},
                        {"worst_violation_magnitude", r.worst_violation_magnitude},
                        {"mass_condition_ok", r.mass_condition_ok},
                        {"mass_slack", r.mass_slack},
                        {"passed", r.passed()}};
}

inline nlohmann::json guarantee_json(const GuaranteeReport& g) {
  nlohmann::json j{{"mechanism", g.mechanism_tag},
                   {"value", g.value},
                   {"method", to_string(g.method)},
                   {"validity", to_string(g.validity)}};
  if (!g.condition_name.empty()) j["condition"] = g.condition_name;
  if (std::isfinite(g.parameter)) j["parameter"] = g.parameter;
  if (std::isfinite(g.crosscheck_residual))
    j["crosscheck_residual"] = g.crosscheck_residual;
  return j;
}

inline void write_guarantee_csv(const std::vector<GuaranteeReport>& rows,
                                std::ostream& os) {
  os << "mechanism,value,method,validity\n";
  for (const GuaranteeReport& g : rows) {
    os << g.mechanism_tag << "," << fmt17(g.value) << "," << to_string(g.method)
       << "," << to_string(g.validity) << "\n";
  }
}

inline nlohmann::json dominance_json(const DominanceReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const GuaranteeReport& g : rep.rows) rows.push_back(guarantee_json(g));
  nlohmann::json j{{"rows", rows},
                   {"capped_bound", rep.capped_bound},
                   {"capped_r_star", rep.capped_r_star},
                   {"posted_value", rep.posted_value},
                   {"det_reserve_available", rep.det_reserve_available},
                   {"margin_over_posted", rep.margin_over_posted},
                   {"dominates_posted_strictly", rep.dominates_posted_strictly},
                   {"dominates_det_strictly", rep.dominates_det_strictly},
                   {"strictness_waived", rep.strictness_waived},
                   {"revenue_concave", rep.revenue_concave},
                   {"beta_weakly_dominates_posted", rep.beta_weakly_dominates_posted}};
  if (rep.det_reserve_available) {
    j["det_reserve_value"] = rep.det_reserve_value;
    j["margin_over_det"] = rep.margin_over_det;
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
  out << text;
  if (!out) throw std::runtime_error("short write to \"" + path + "\"");
}

}  // namespace cra
