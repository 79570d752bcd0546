#pragma once

// JSON run configuration -> Problem + Discretization.
//
// {
//   "contour": {"preset": "astroid"}  or  {"map": "w+1/(3*w^3)", "derivative": "..."},
//   "kernel": "t^2+s^2",
//   "lambda": 0.5  or  [re, im],
//   "jumps": ["0.7*pi", "2*pi"],
//   "rhs": {"pieces": [{"from": 0, "to": "0.7*pi", "expr": "..."}, ...]}
//        | {"samples": "f.csv", "jump_values": [[re, im], ...]}
//        | {"manufactured": true},
//   "exact": {"pieces": [...]},
//   "discretization": {"m": 4, "n_B": 160, "quad_N": 200, "oracle_N": 4000, "eps2": 0.01,
//                      "collocation_rule": "offset"},
//   "grid_size": 2000, "hoelder_alpha": 1.0, "hoelder_samples": 64, "n_B_list": [160, 320]
// }

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fredholm/colloc.hpp"
#include "fredholm/contour.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/expr.hpp"
#include "fredholm/piecewise.hpp"
#include "fredholm/quadrature.hpp"

namespace fredholm {

using json = nlohmann::json;

struct RunConfig {
  Contour contour{ConformalMap::preset("circle")};
  std::string kernel_text = "0";
  complex lambda{0.0};
  JumpSet jumps;
  std::optional<PiecewiseFn> rhs;  // empty when manufactured
  bool manufactured = false;
  std::optional<PiecewiseFn> exact;
  Discretization disc;
  std::size_t grid_size = 2000;
  double hoelder_alpha = 1.0;
  std::size_t hoelder_samples = 64;
  std::vector<std::size_t> n_B_list;

  Problem problem() const {
    Kernel kernel = Kernel::parse(kernel_text);
    if (manufactured) return manufactured_problem(contour, kernel, lambda, *exact, disc.quad);
    return Problem(contour, kernel, lambda, *rhs, jumps, exact);
  }
};

namespace detail {

inline void check_keys(const json& obj, std::string_view where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + std::string(where));
}

/// Angle given as a number or as a real expression in pi, e.g. "0.7*pi".
inline double parse_angle(const json& v, std::string_view where) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ConfigError(std::string(where) + ": angle must be a number or a string");
  expr::Environment env;
  env.bind("pi", std::numbers::pi);
  complex z;
  try {
    z = expr::Expression::parse(v.get<std::string>()).eval(env);
  } catch (const EvaluationError& e) {
    throw ConfigError(std::string(where) + ": " + e.what());
  }
  if (z.imag() != 0.0 || !std::isfinite(z.real())) throw ConfigError(std::string(where) + ": angle must be real");
  return z.real();
}

inline complex parse_complex(const json& v, std::string_view where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(std::string(where) + " must be a number or [re, im]");
}

template <class T>
T get_number(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError(std::string(key) + " must be a non-negative integer");
  } else if (!v.is_number()) {
    throw ConfigError(std::string(key) + " must be a number");
  }
  return v.get<T>();
}

inline std::string get_string(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_string()) throw ConfigError(std::string("missing string field '") + key + "'");
  return obj.at(key).get<std::string>();
}

inline PiecewiseFn parse_pieces(const Contour& contour, const json& block, const JumpSet& jumps, std::string_view where) {
  if (!block.contains("pieces") || !block.at("pieces").is_array() || block.at("pieces").empty())
    throw ConfigError(std::string(where) + ".pieces must be a non-empty array");
  std::vector<PiecewiseFn::ExpressionPiece> pieces;
  for (const auto& p : block.at("pieces")) {
    check_keys(p, std::string(where) + " piece", {"from", "to", "expr"});
    if (!p.contains("from") || !p.contains("to")) throw ConfigError(std::string(where) + " piece needs from/to");
    pieces.push_back({parse_angle(p.at("from"), "from"), parse_angle(p.at("to"), "to"),
                      expr::Expression::parse(get_string(p, "expr"))});
    for (const auto& v : pieces.back().expression.variables())
      if (v != "t" && v != "theta") throw ConfigError("piece expression uses unknown variable '" + v + "'");
  }
  return PiecewiseFn::from_expressions(contour, pieces, jumps);
}

inline PiecewiseFn parse_samples(const Contour& contour, const json& block, const JumpSet& jumps,
                                 const std::filesystem::path& base) {
  const std::filesystem::path file = base / get_string(block, "samples");
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open sample file " + file.string());
  std::vector<double> angles;
  std::vector<complex> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("theta", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double th, re, im;
    if (!(row >> th >> re >> im)) throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected theta,re,im");
    angles.push_back(th);
    values.emplace_back(re, im);
  }
  std::vector<complex> jv;
  if (block.contains("jump_values")) {
    if (!block.at("jump_values").is_array()) throw ConfigError("jump_values must be an array");
    for (const auto& v : block.at("jump_values")) jv.push_back(parse_complex(v, "jump_values entry"));
  }
  return PiecewiseFn::from_samples(contour, std::move(angles), std::move(values), jumps, std::move(jv));
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j, const std::filesystem::path& base = ".") {
  using namespace detail;
  check_keys(j, "config", {"contour", "kernel", "lambda", "jumps", "rhs", "exact", "discretization", "grid_size",
                           "hoelder_alpha", "hoelder_samples", "n_B_list", "description"});
  RunConfig cfg;

  if (!j.contains("contour")) throw ConfigError("missing 'contour' block");
  const json& c = j.at("contour");
  check_keys(c, "contour", {"preset", "map", "derivative", "reference_angle"});
  const double ref = c.contains("reference_angle") ? parse_angle(c.at("reference_angle"), "reference_angle") : 0.0;
  if (c.contains("preset")) {
    if (c.contains("map")) throw ConfigError("contour: give either 'preset' or 'map', not both");
    cfg.contour = Contour(ConformalMap::preset(get_string(c, "preset")), ref);
  } else {
    std::optional<std::string> d;
    if (c.contains("derivative")) d = get_string(c, "derivative");
    const std::string map = get_string(c, "map");
    cfg.contour = Contour(d ? ConformalMap::from_strings(map, *d) : ConformalMap::from_strings(map), ref);
  }

  cfg.kernel_text = get_string(j, "kernel");
  for (const auto& v : expr::Expression::parse(cfg.kernel_text).variables())
    if (v != "t" && v != "s") throw ConfigError("kernel uses unknown variable '" + v + "'");
  if (!j.contains("lambda")) throw ConfigError("missing 'lambda'");
  cfg.lambda = parse_complex(j.at("lambda"), "lambda");

  std::vector<double> jumps;
  if (j.contains("jumps")) {
    if (!j.at("jumps").is_array()) throw ConfigError("jumps must be an array");
    for (const auto& v : j.at("jumps")) jumps.push_back(parse_angle(v, "jumps"));
  }
  cfg.jumps = JumpSet(jumps);

  if (j.contains("exact")) {
    check_keys(j.at("exact"), "exact", {"pieces"});
    cfg.exact = parse_pieces(cfg.contour, j.at("exact"), cfg.jumps, "exact");
  }

  if (!j.contains("rhs")) throw ConfigError("missing 'rhs' block");
  const json& r = j.at("rhs");
  check_keys(r, "rhs", {"pieces", "samples", "jump_values", "manufactured"});
  const int kinds = r.contains("pieces") + r.contains("samples") + r.contains("manufactured");
  if (kinds != 1) throw ConfigError("rhs: exactly one of 'pieces', 'samples', 'manufactured' is required");
  if (r.contains("manufactured")) {
    if (!r.at("manufactured").is_boolean() || !r.at("manufactured").get<bool>())
      throw ConfigError("rhs.manufactured must be true");
    if (!cfg.exact) throw ConfigError("a manufactured rhs needs an 'exact' block");
    cfg.manufactured = true;
  } else if (r.contains("pieces")) {
    cfg.rhs = parse_pieces(cfg.contour, r, cfg.jumps, "rhs");
  } else {
    cfg.rhs = parse_samples(cfg.contour, r, cfg.jumps, base);
  }

  if (j.contains("discretization")) {
    const json& d = j.at("discretization");
    check_keys(d, "discretization", {"m", "n_B", "quad_N", "oracle_N", "eps2", "collocation_rule"});
    cfg.disc.order = static_cast<int>(get_number<std::size_t>(d, "m", 4));
    cfg.disc.n_B = get_number<std::size_t>(d, "n_B", cfg.disc.n_B);
    cfg.disc.quad.N = get_number<std::size_t>(d, "quad_N", cfg.disc.quad.N);
    cfg.disc.quad.oracle_N = get_number<std::size_t>(d, "oracle_N", cfg.disc.quad.oracle_N);
    cfg.disc.eps2 = get_number<double>(d, "eps2", cfg.disc.eps2);
    if (d.contains("collocation_rule")) cfg.disc.rule = parse_collocation_rule(get_string(d, "collocation_rule"));
  }
  cfg.grid_size = get_number<std::size_t>(j, "grid_size", cfg.grid_size);
  if (cfg.grid_size < 1) throw ConfigError("grid_size must be positive");
  cfg.hoelder_alpha = get_number<double>(j, "hoelder_alpha", cfg.hoelder_alpha);
  if (!(cfg.hoelder_alpha > 0.0 && cfg.hoelder_alpha <= 1.0)) throw ConfigError("hoelder_alpha must lie in (0, 1]");
  cfg.hoelder_samples = get_number<std::size_t>(j, "hoelder_samples", cfg.hoelder_samples);
  if (cfg.hoelder_samples < 8) throw ConfigError("hoelder_samples must be at least 8");
  if (j.contains("n_B_list")) {
    if (!j.at("n_B_list").is_array()) throw ConfigError("n_B_list must be an array");
    for (const auto& v : j.at("n_B_list")) {
      if (!v.is_number_integer() || v.get<long long>() <= 0) throw ConfigError("n_B_list entries must be positive integers");
      cfg.n_B_list.push_back(v.get<std::size_t>());
    }
  }
  cfg.disc.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  try {
    return parse_run_config(j, path.parent_path().empty() ? "." : path.parent_path());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

}  // namespace fredholm
