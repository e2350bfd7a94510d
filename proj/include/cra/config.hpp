#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cra/marginal.hpp"
#include "cra/mechanism.hpp"

namespace cra {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known)
      throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
  }
}

inline double require_number(const nlohmann::json& obj, const char* key,
                             const std::string& where) {
  if (!obj.contains(key))
    throw ConfigError(where + "." + key + ": missing");
  if (!obj.at(key).is_number())
    throw ConfigError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

inline std::vector<double> require_number_array(const nlohmann::json& obj,
                                                const char* key,
                                                const std::string& where) {
  if (!obj.contains(key))
    throw ConfigError(where + "." + key + ": missing");
  const auto& arr = obj.at(key);
  if (!arr.is_array())
    throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number())
      throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

// {"family":"equal_revenue","alpha":0.5} and friends.
inline Marginal parse_marginal(const nlohmann::json& j,
                               const std::string& where = "distribution") {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  if (!j.contains("family") || !j.at("family").is_string())
    throw ConfigError(where + ".family: missing or not a string");
  const std::string family = j.at("family").get<std::string>();
  try {
    if (family == "uniform") {
      detail::reject_unknown_keys(j, {"family"}, where);
      return Marginal::uniform();
    }
    if (family == "uniform_with_atom") {
      detail::reject_unknown_keys(j, {"family", "pr_one"}, where);
      return Marginal::uniform_with_atom(
          detail::require_number(j, "pr_one", where));
    }
    if (family == "equal_revenue") {
      detail::reject_unknown_keys(j, {"family", "alpha"}, where);
      return Marginal::equal_revenue(detail::require_number(j, "alpha", where));
    }
    if (family == "truncated_pareto") {
      detail::reject_unknown_keys(j, {"family", "alpha", "beta"}, where);
      return Marginal::truncated_pareto(
          detail::require_number(j, "alpha", where),
          detail::require_number(j, "beta", where));
    }
    if (family == "point_mass") {
      detail::reject_unknown_keys(j, {"family", "at"}, where);
      return Marginal::point_mass(detail::require_number(j, "at", where));
    }
    if (family == "piecewise_grid") {
      detail::reject_unknown_keys(
          j, {"family", "points", "masses", "atom_at_zero", "atom_at_one"},
          where);
      const double a0 =
          j.contains("atom_at_zero") ? detail::require_number(j, "atom_at_zero", where) : 0.0;
      const double a1 =
          j.contains("atom_at_one") ? detail::require_number(j, "atom_at_one", where) : 0.0;
      return Marginal::piecewise(
          detail::require_number_array(j, "points", where),
          detail::require_number_array(j, "masses", where), a0, a1);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ".family: unknown family \"" + family + "\"");
}

// {"kind":"spa_capped_beta","r":0.5}, {"kind":"posted_price","p":0.5},
// {"kind":"spa_random_reserve","reserve":{"tag":"beta"}}, ...
inline Mechanism parse_mechanism(const nlohmann::json& j, int n,
                                 const std::string& where = "mechanism") {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(where + ".kind: missing or not a string");
  const std::string kind = j.at("kind").get<std::string>();
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer())
      throw ConfigError(where + ".n: expected an integer");
    const int jn = j.at("n").get<int>();
    if (jn != n)
      throw ConfigError(where + ".n: conflicts with the configured bidder count");
  }
  try {
    if (kind == "spa_plain") {
      detail::reject_unknown_keys(j, {"kind", "n"}, where);
      return Mechanism::spa_plain(n);
    }
    if (kind == "spa_uniform_reserve") {
      detail::reject_unknown_keys(j, {"kind", "n"}, where);
      if (n != 2)
        throw ConfigError(where + ": spa_uniform_reserve is a two-bidder design");
      return Mechanism::spa_uniform_reserve();
    }
    if (kind == "spa_beta_reserve") {
      detail::reject_unknown_keys(j, {"kind", "n"}, where);
      return Mechanism::spa_beta_reserve(n);
    }
    if (kind == "spa_capped_beta") {
      detail::reject_unknown_keys(j, {"kind", "n", "r"}, where);
      return Mechanism::spa_capped_beta(n, detail::require_number(j, "r", where));
    }
    if (kind == "spa_deterministic_reserve") {
      detail::reject_unknown_keys(j, {"kind", "n", "r"}, where);
      return Mechanism::spa_deterministic_reserve(
          n, detail::require_number(j, "r", where));
    }
    if (kind == "posted_price") {
      detail::reject_unknown_keys(j, {"kind", "n", "p"}, where);
      return Mechanism::posted_price(n, detail::require_number(j, "p", where));
    }
    if (kind == "spa_random_reserve") {
      detail::reject_unknown_keys(j, {"kind", "n", "reserve"}, where);
      if (!j.contains("reserve") || !j.at("reserve").is_object())
        throw ConfigError(where + ".reserve: missing or not an object");
      const auto& res = j.at("reserve");
      if (!res.contains("tag") || !res.at("tag").is_string())
        throw ConfigError(where + ".reserve.tag: missing or not a string");
      const std::string tag = res.at("tag").get<std::string>();
      const std::string rwhere = where + ".reserve";
      if (tag == "uniform") {
        detail::reject_unknown_keys(res, {"tag"}, rwhere);
        if (n != 2)
          throw ConfigError(where + ": the uniform reserve is a two-bidder design");
        return Mechanism::spa_uniform_reserve();
      }
      if (tag == "beta") {
        detail::reject_unknown_keys(res, {"tag"}, rwhere);
        return Mechanism::spa_beta_reserve(n);
      }
      if (tag == "capped_beta") {
        detail::reject_unknown_keys(res, {"tag", "r"}, rwhere);
        return Mechanism::spa_capped_beta(
            n, detail::require_number(res, "r", rwhere));
      }
      if (tag == "degenerate") {
        detail::reject_unknown_keys(res, {"tag", "r"}, rwhere);
        return Mechanism::spa_deterministic_reserve(
            n, detail::require_number(res, "r", rwhere));
      }
      throw ConfigError(rwhere + ".tag: unknown tag \"" + tag + "\"");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ".kind: unknown kind \"" + kind + "\"");
}

struct RunConfig {
  std::optional<Marginal> distribution;
  std::optional<nlohmann::json> mechanism;  // constructed per effective n
  int n_bidders = 2;
  int grid_size = 0;  // 0 means the per-command default
  double tolerance = 1e-6;
  std::string out_dir = ".";
  std::string format = "json";

  Mechanism make_mechanism() const {
    if (!mechanism) throw ConfigError("mechanism: missing from config");
    return parse_mechanism(*mechanism, n_bidders);
  }
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  detail::reject_unknown_keys(j,
                              {"distribution", "mechanism", "n_bidders",
                               "grid_size", "tolerance", "out_dir", "format"},
                              "config");
  RunConfig c;
  if (j.contains("distribution")) c.distribution = parse_marginal(j.at("distribution"));
  if (j.contains("n_bidders")) {
    if (!j.at("n_bidders").is_number_integer())
      throw ConfigError("config.n_bidders: expected an integer");
    c.n_bidders = j.at("n_bidders").get<int>();
    if (c.n_bidders < 2)
      throw ConfigError("config.n_bidders: must be at least 2");
  }
  if (j.contains("grid_size")) {
    if (!j.at("grid_size").is_number_integer())
      throw ConfigError("config.grid_size: expected an integer");
    c.grid_size = j.at("grid_size").get<int>();
    if (c.grid_size < 0 || c.grid_size == 1)
      throw ConfigError("config.grid_size: must be 0 (default) or at least 2");
  }
  if (j.contains("tolerance")) {
    c.tolerance = detail::require_number(j, "tolerance", "config");
    if (!(c.tolerance > 0))
      throw ConfigError("config.tolerance: must be positive");
  }
  if (j.contains("out_dir")) {
    if (!j.at("out_dir").is_string())
      throw ConfigError("config.out_dir: expected a string");
    c.out_dir = j.at("out_dir").get<std::string>();
  }
  if (j.contains("format")) {
    if (!j.at("format").is_string())
      throw ConfigError("config.format: expected a string");
    c.format = j.at("format").get<std::string>();
    if (c.format != "json" && c.format != "csv")
      throw ConfigError("config.format: must be \"json\" or \"csv\"");
  }
  if (j.contains("mechanism")) {
    c.mechanism = j.at("mechanism");
    (void)c.make_mechanism();  // validate eagerly, before any computation
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is one past the offending byte; turn it into a line number.
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace cra
