#pragma once

// Runs behind the CLI subcommands. Every run computes all results first and only
// then writes its files, so a failure leaves no partial output behind.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fredholm/colloc.hpp"
#include "fredholm/config.hpp"
#include "fredholm/interp.hpp"
#include "fredholm/piecewise.hpp"
#include "fredholm/trapezoid.hpp"

namespace fredholm {

using ordered_json = nlohmann::ordered_json;

struct RunOptions {
  unsigned threads = 1;
  bool reproducible = false;  // report zero timings so repeated runs are byte-identical
};

/// Fixed number format for every CSV: 17 significant digits.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline ordered_json complex_json(complex z) { return ordered_json::array({z.real(), z.imag()}); }

inline ordered_json optional_number(std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

/// Writes to a temporary sibling then renames, creating the directory if needed.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<double> uniform_grid(std::size_t G) {
  std::vector<double> g(G);
  for (std::size_t i = 1; i <= G; ++i) g[i - 1] = kTwoPi * static_cast<double>(i) / static_cast<double>(G);
  return g;
}

/// One solve plus its error measurements against the exact solution, if there is one.
struct SolveReport {
  Solution solution;
  std::optional<GridErrors> errors;
  std::optional<double> ph_norm_error;
  double elapsed_seconds = 0.0;
};

inline SolveReport solve_and_measure(const RunConfig& cfg, const Problem& problem, const Discretization& disc,
                                     bool enriched = true) {
  const auto t0 = std::chrono::steady_clock::now();
  Solution sol = enriched ? solve(problem, disc) : solve_without_enrichment(problem, disc);
  SolveReport rep{std::move(sol), std::nullopt, std::nullopt, 0.0};
  if (problem.exact) {
    const auto& phi = rep.solution;
    rep.errors = measure_grid_errors([&](double th) { return phi(th); }, *problem.exact, problem.jumps, disc.eps2,
                                     cfg.grid_size, disc.n_B);
    const auto& exact = *problem.exact;
    rep.ph_norm_error = ph_norm_estimate([&](double th) { return phi(th) - exact.eval(th); }, problem.contour,
                                         problem.jumps, cfg.hoelder_alpha, cfg.hoelder_samples)
                            .total;
  }
  rep.elapsed_seconds = detail::seconds_since(t0);
  return rep;
}

inline ordered_json manifest_json(const RunConfig& cfg, const Discretization& disc, const Problem& problem,
                                  const SolveReport& rep, const RunOptions& opt) {
  const auto& d = rep.solution.diagnostics;
  ordered_json m;
  m["n_B"] = disc.n_B;
  m["m"] = disc.order;
  m["quad_N"] = disc.quad.N;
  m["oracle_N"] = disc.quad.oracle_N;
  m["eps2"] = disc.eps2;
  m["collocation_rule"] = to_string(disc.rule);
  m["grid_size"] = cfg.grid_size;
  m["hoelder_alpha"] = cfg.hoelder_alpha;
  m["hoelder_samples"] = cfg.hoelder_samples;
  m["lambda"] = complex_json(problem.lambda);
  m["kernel"] = cfg.kernel_text;
  m["jumps"] = problem.jumps.angles();
  m["manufactured_rhs"] = cfg.manufactured;
  m["system_size"] = disc.n_B + problem.jumps.size();
  m["residual_inf"] = d.residual_inf;
  m["rhs_inf"] = d.rhs_inf;
  m["residual_ok"] = d.residual_ok();
  m["condition_estimate_1norm"] = d.condition_estimate_1norm;
  m["min_pivot_ratio"] = d.min_pivot_ratio;
  m["max_grid_error"] = optional_number(rep.errors ? std::optional(rep.errors->max_excluding_wrap) : std::nullopt);
  m["max_grid_error_including_wrap"] =
      optional_number(rep.errors ? std::optional(rep.errors->max_including_wrap) : std::nullopt);
  m["near_jump_error"] = optional_number(rep.errors ? std::optional(rep.errors->near_jump) : std::nullopt);
  m["away_error"] = optional_number(rep.errors ? std::optional(rep.errors->away) : std::nullopt);
  m["ph_norm_error_estimate"] = optional_number(rep.ph_norm_error);
  ordered_json beta = ordered_json::array();
  for (const auto& b : rep.solution.phi.beta()) beta.push_back(complex_json(b));
  m["beta_coeffs"] = beta;
  m["assembly_seconds"] = opt.reproducible ? 0.0 : d.assembly_seconds;
  m["solve_seconds"] = opt.reproducible ? 0.0 : d.solve_seconds;
  m["elapsed_seconds"] = opt.reproducible ? 0.0 : rep.elapsed_seconds;
  return m;
}

struct SolveArtifacts {
  std::string csv;
  ordered_json manifest;
  SolveReport report;
};

/// solve: solution.csv (theta, re_phi, im_phi[, re_exact, im_exact, abs_err]) and manifest.json.
inline SolveArtifacts run_solve(const RunConfig& cfg, const RunOptions& opt = {}) {
  Discretization disc = cfg.disc;
  disc.threads = opt.threads;
  const auto t0 = std::chrono::steady_clock::now();
  const Problem problem = cfg.problem();
  SolveReport rep = solve_and_measure(cfg, problem, disc);
  rep.elapsed_seconds = detail::seconds_since(t0);

  std::ostringstream csv;
  csv << (problem.exact ? "theta,re_phi,im_phi,re_exact,im_exact,abs_err\n" : "theta,re_phi,im_phi\n");
  for (double th : uniform_grid(cfg.grid_size)) {
    const complex v = rep.solution(th);
    csv << fmt(th) << ',' << fmt(v.real()) << ',' << fmt(v.imag());
    if (problem.exact) {
      const complex e = problem.exact->eval(th);
      csv << ',' << fmt(e.real()) << ',' << fmt(e.imag()) << ',' << fmt(std::abs(v - e));
    }
    csv << '\n';
  }
  auto manifest = manifest_json(cfg, disc, problem, rep, opt);
  return {csv.str(), std::move(manifest), std::move(rep)};
}

inline void write_solve(const SolveArtifacts& a, const std::filesystem::path& out) {
  write_file(out / "solution.csv", a.csv);
  write_file(out / "manifest.json", a.manifest.dump(2) + "\n");
}

struct ConvergenceRow {
  std::size_t n_B;
  double max_grid_error, max_grid_error_including_wrap, ph_norm_error_estimate;
  double residual_inf, condition_estimate_1norm, elapsed_seconds;
  bool residual_ok;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;

  /// log2(e(n)/e(2n)) between consecutive rows; NaN where a row is not a doubling.
  std::vector<double> orders() const {
    std::vector<double> o;
    for (std::size_t i = 1; i < rows.size(); ++i)
      o.push_back(rows[i].n_B == 2 * rows[i - 1].n_B
                      ? std::log2(rows[i - 1].max_grid_error / rows[i].max_grid_error)
                      : std::nan(""));
    return o;
  }

  std::string csv() const {
    std::ostringstream s;
    s << "n_B,max_grid_error,max_grid_error_including_wrap,ph_norm_error_estimate,residual_inf,"
         "condition_estimate_1norm,elapsed_seconds";
    if (rows.size() > 1) s << ",order";
    s << '\n';
    const auto o = orders();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      s << r.n_B << ',' << fmt(r.max_grid_error) << ',' << fmt(r.max_grid_error_including_wrap) << ','
        << fmt(r.ph_norm_error_estimate) << ',' << fmt(r.residual_inf) << ',' << fmt(r.condition_estimate_1norm)
        << ',' << fmt(r.elapsed_seconds);
      if (rows.size() > 1) s << ',' << (i == 0 ? std::string() : fmt(o[i - 1]));
      s << '\n';
    }
    return s.str();
  }
};

inline ConvergenceReport run_convergence(const RunConfig& cfg, std::vector<std::size_t> n_B_list,
                                         const RunOptions& opt = {}) {
  if (n_B_list.empty()) n_B_list = cfg.n_B_list;
  if (n_B_list.empty()) n_B_list = {cfg.disc.n_B};
  for (std::size_t i = 1; i < n_B_list.size(); ++i)
    if (!(n_B_list[i] > n_B_list[i - 1])) throw ConfigError("n_B list must be strictly ascending");
  const Problem problem = cfg.problem();
  if (!problem.exact) throw ConfigError("convergence runs need an 'exact' block");
  ConvergenceReport rep;
  for (std::size_t n : n_B_list) {
    Discretization disc = cfg.disc;
    disc.n_B = n;
    disc.threads = opt.threads;
    try {
      disc.validate();
      const auto r = solve_and_measure(cfg, problem, disc);
      const auto& d = r.solution.diagnostics;
      rep.rows.push_back({n, r.errors->max_excluding_wrap, r.errors->max_including_wrap, *r.ph_norm_error,
                          d.residual_inf, d.condition_estimate_1norm, opt.reproducible ? 0.0 : r.elapsed_seconds,
                          d.residual_ok()});
    } catch (const ConfigError& e) {
      throw ConfigError("n_B = " + std::to_string(n) + ": " + e.what());
    } catch (const SingularSystemError& e) {
      throw SingularSystemError("n_B = " + std::to_string(n) + ": " + e.what(), e.step());
    } catch (const NumericalError& e) {
      throw NumericalError("n_B = " + std::to_string(n) + ": " + e.what());
    }
  }
  return rep;
}

struct GibbsReport {
  SolveReport enriched, plain;
  double beta1_abs = 0.0;

  std::string csv() const {
    std::ostringstream s;
    s << "variant,near_jump_error,away_error,max_grid_error,max_grid_error_including_wrap,beta1_abs,"
         "near_jump_over_beta1\n";
    for (const auto* r : {&enriched, &plain}) {
      const auto& e = *r->errors;
      s << (r == &enriched ? "enriched" : "plain") << ',' << fmt(e.near_jump) << ',' << fmt(e.away) << ','
        << fmt(e.max_excluding_wrap) << ',' << fmt(e.max_including_wrap) << ',' << fmt(beta1_abs) << ','
        << fmt(beta1_abs > 0.0 ? e.near_jump / beta1_abs : std::nan("")) << '\n';
    }
    return s.str();
  }
};

/// The same problem solved with and without the Heaviside columns.
inline GibbsReport run_gibbs_demo(const RunConfig& cfg, const RunOptions& opt = {}) {
  Discretization disc = cfg.disc;
  disc.threads = opt.threads;
  const Problem problem = cfg.problem();
  if (!problem.exact) throw ConfigError("the Gibbs comparison needs an 'exact' block");
  GibbsReport rep{solve_and_measure(cfg, problem, disc, true), solve_and_measure(cfg, problem, disc, false), 0.0};
  if (!rep.enriched.solution.phi.beta().empty()) rep.beta1_abs = std::abs(rep.enriched.solution.phi.beta()[0]);
  return rep;
}

/// interp: the B-spline-Heaviside projection of the right-hand side on the run's basis.
inline std::string run_interp(const RunConfig& cfg) {
  const Problem problem = cfg.problem();
  auto basis = std::make_shared<const BSplineBasis>(
      problem.contour, generate_nodes(problem.contour, cfg.disc.n_B, cfg.disc.order), cfg.disc.order);
  const auto approx = bh_project(problem.rhs, basis, problem.jumps, cfg.disc.eps2, cfg.disc.rule);
  std::ostringstream s;
  s << "theta,re_f,im_f,re_approx,im_approx,abs_err\n";
  for (double th : uniform_grid(cfg.grid_size)) {
    const complex f = problem.rhs.eval(th), a = approx(th);
    s << fmt(th) << ',' << fmt(f.real()) << ',' << fmt(f.imag()) << ',' << fmt(a.real()) << ',' << fmt(a.imag())
      << ',' << fmt(std::abs(f - a)) << '\n';
  }
  return s.str();
}

/// Trapezoid error for the periodic integrand exp(cos theta) against the N = 4096 value.
struct QuadcheckRow {
  std::size_t N;
  double abs_error;
};

inline std::vector<QuadcheckRow> quadcheck_rows(std::vector<std::size_t> Ns = {4, 8, 16, 32, 64, 128, 256}) {
  auto g = [](double th) { return complex(std::exp(std::cos(th))); };
  const complex ref = trapezoid(g, 0.0, kTwoPi, 4096);
  std::vector<QuadcheckRow> rows;
  for (std::size_t N : Ns) rows.push_back({N, std::abs(trapezoid(g, 0.0, kTwoPi, N) - ref)});
  return rows;
}

inline std::string run_quadcheck() {
  std::ostringstream s;
  s << "N,abs_error\n";
  for (const auto& r : quadcheck_rows()) s << r.N << ',' << fmt(r.abs_error) << '\n';
  return s.str();
}

/// basis: (k, theta, re_value, im_value) for every basis function on a fine grid.
inline std::string run_basis_dump(const Contour& contour, int order, std::size_t n_B, std::size_t per_arc = 16) {
  const BSplineBasis basis(contour, generate_nodes(contour, n_B, static_cast<std::size_t>(order)), order);
  std::ostringstream s;
  s << "k,theta,re_value,im_value\n";
  const std::size_t G = n_B * per_arc;
  for (std::size_t k = 0; k < n_B; ++k)
    for (std::size_t i = 0; i < G; ++i) {
      const double th = kTwoPi * static_cast<double>(i) / static_cast<double>(G);
      const complex v = basis.eval(k, th);
      s << k << ',' << fmt(th) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
    }
  return s.str();
}

}  // namespace fredholm
