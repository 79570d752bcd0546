// Acceptance run: one PASS/FAIL line per criterion, measurements alongside.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "fredholm/config.hpp"
#include "fredholm/harness.hpp"

using namespace fredholm;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = FREDHOLM_CONFIG_DIR;
const std::string kCli = FREDHOLM_CLI;

struct Verdict {
  bool pass;
  std::string detail;
};

// residual checks gathered from every solve below, reported under criterion 8
struct Hygiene {
  std::size_t solves = 0, residual_failures = 0;
  double worst_relative = 0.0;
  void record(double residual, double rhs, bool ok) {
    ++solves;
    if (!ok) ++residual_failures;
    if (rhs > 0.0) worst_relative = std::max(worst_relative, residual / rhs);
  }
  void record(const SolveDiagnostics& d) { record(d.residual_inf, d.rhs_inf, d.residual_ok()); }
} hygiene;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_diff(std::span<const complex> a, std::span<const complex> b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// plain trapezoid with N subintervals, written out here so the oracle does not share code with the library
complex oracle_trapezoid(const std::function<complex(double)>& g, double a, double b, std::size_t N) {
  const double h = (b - a) / static_cast<double>(N);
  complex sum = 0.5 * (g(a) + g(b));
  for (std::size_t i = 1; i < N; ++i) sum += g(a + static_cast<double>(i) * h);
  return h * sum;
}

Verdict criterion1() {
  std::ostringstream d;
  double err[2] = {0, 0}, wrap[2] = {0, 0}, secs[2] = {0, 0};
  bool residuals = true;
  const char* files[2] = {"astroid_160.json", "astroid_320.json"};
  for (int i = 0; i < 2; ++i) {
    const auto cfg = load_run_config(kConfigs / files[i]);
    const auto t0 = std::chrono::steady_clock::now();
    const auto a = run_solve(cfg);
    secs[i] = seconds(t0);
    hygiene.record(a.report.solution.diagnostics);
    residuals = residuals && a.report.solution.diagnostics.residual_ok();
    err[i] = a.report.errors->max_excluding_wrap;
    wrap[i] = a.report.errors->max_including_wrap;
    d << "n_B=" << cfg.disc.n_B << " err=" << num(err[i]) << " err_incl_wrap=" << num(wrap[i])
      << " away=" << num(a.report.errors->away) << " time=" << num(secs[i]) << "s; ";
  }
  const double ratio = err[0] / err[1];
  const bool window = err[0] >= 0.16 && err[0] <= 0.64 && err[1] >= 0.024 && err[1] <= 0.096 && ratio >= 4.0;
  const bool fallback = err[1] <= 0.1 && ratio >= 4.0;
  const bool fast = secs[0] <= 60.0 && secs[1] <= 60.0;
  d << "ratio=" << num(ratio) << " (incl wrap " << num(wrap[0] / wrap[1]) << "); window "
    << (window ? "met" : "missed") << ", fallback " << (fallback ? "met" : "missed");
  return {(window || fallback) && fast && residuals, d.str()};
}

Verdict criterion2() {
  const auto cfg = load_run_config(kConfigs / "circle_manufactured.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_convergence(cfg, {40, 80, 160, 320});
  const double secs = seconds(t0);
  std::ostringstream d;
  bool decreasing = true, order_ok = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    hygiene.record(r.residual_inf, 0.0, r.residual_ok);
    d << "e(" << r.n_B << ")=" << num(r.max_grid_error) << ' ';
    if (i > 0 && !(r.max_grid_error < rep.rows[i - 1].max_grid_error)) decreasing = false;
  }
  for (double o : rep.orders()) {
    d << "order=" << num(o) << ' ';
    if (!(o >= 1.0)) order_ok = false;
  }
  const double last = rep.rows.back().max_grid_error;
  d << "time=" << num(secs) << "s";
  return {decreasing && order_ok && last <= 1e-3 && secs <= 120.0, d.str()};
}

Verdict criterion3() {
  const auto cfg = load_run_config(kConfigs / "astroid_160.json");
  Problem problem = cfg.problem();
  Discretization disc = cfg.disc;
  disc.n_B = 40;
  disc.quad.N = 200;
  const auto sys = assemble(problem, disc);
  const auto& basis = *sys.basis;
  const auto& contour = problem.contour;
  const std::size_t n_B = basis.size(), N = 4000;
  const int m = basis.order();

  // per-arc samples shared by every row: contour points, ds/dtheta times trapezoid weight, and the m branches
  struct Arc {
    std::vector<complex> s, w;
    std::vector<std::vector<complex>> b;  // b[r][i]: branch r of B_{a-r}
  };
  std::vector<Arc> arcs(n_B);
  for (std::size_t a = 0; a < n_B; ++a) {
    const double lo = basis.knots().angle(a), hi = basis.knots().angle(a + 1), h = (hi - lo) / N;
    auto& arc = arcs[a];
    arc.b.assign(static_cast<std::size_t>(m), {});
    for (std::size_t i = 0; i <= N; ++i) {
      const double th = i == N ? hi : lo + static_cast<double>(i) * h;
      const complex s = contour.point(th);
      arc.s.push_back(s);
      arc.w.push_back(contour.tangent_factor(th) * h * (i == 0 || i == N ? 0.5 : 1.0));
      for (int r = 0; r < m; ++r) arc.b[static_cast<std::size_t>(r)].push_back(basis.branch((a + n_B - r) % n_B, r, s));
    }
  }
  std::vector<double> breaks;
  for (std::size_t a = 0; a < n_B; ++a) breaks.push_back(basis.knots().angle(a));
  breaks.push_back(kTwoPi);

  double worst = 0.0;
  std::size_t entries = 0;
  for (std::size_t j = 0; j < sys.size(); ++j) {
    const complex tc = contour.point(sys.points.angles[j]);
    std::vector<complex> oracle(sys.size(), 0.0);
    for (std::size_t a = 0; a < n_B; ++a) {
      const auto& arc = arcs[a];
      for (std::size_t i = 0; i <= N; ++i) {
        const complex kw = problem.kernel(tc, arc.s[i]) * arc.w[i];
        for (int r = 0; r < m; ++r) oracle[(a + n_B - r) % n_B] += arc.b[static_cast<std::size_t>(r)][i] * kw;
      }
    }
    for (std::size_t r = 0; r < problem.jumps.size(); ++r) {
      const double d = problem.jumps[r];
      std::vector<double> cuts{d};
      for (double b : breaks)
        if (b > d + kAngleTolerance) cuts.push_back(b);
      if (cuts.back() < kTwoPi) cuts.push_back(kTwoPi);
      complex sum = 0.0;
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
        sum += oracle_trapezoid(
            [&](double th) { return problem.kernel(tc, contour.point(th)) * contour.tangent_factor(th); }, cuts[c],
            cuts[c + 1], N);
      oracle[n_B + r] = sum;
    }
    for (std::size_t k = 0; k < sys.size(); ++k) {
      const complex got = sys.b2(j, k), want = oracle[k];
      const double rel = want == complex(0.0) ? (got == complex(0.0) ? 0.0 : INFINITY) : std::abs(got - want) / std::abs(want);
      worst = std::max(worst, rel);
      ++entries;
    }
  }
  double quad32 = INFINITY;
  for (const auto& row : quadcheck_rows())
    if (row.N == 32) quad32 = row.abs_error;
  // the N = 4096 reference against the closed form 2 pi I0(1)
  const double ref = oracle_trapezoid([](double th) { return complex(std::exp(std::cos(th))); }, 0.0, kTwoPi, 4096).real();
  const double closed = 2.0 * std::numbers::pi * std::cyl_bessel_i(0.0, 1.0);
  std::ostringstream d;
  d << entries << " B2 entries, worst relative deviation from N=4000 oracle " << num(worst) << "; quadcheck N=32 error "
    << num(quad32) << " (reference vs 2pi*I0(1): " << num(std::abs(ref - closed)) << ")";
  return {worst <= 1e-6 && quad32 <= 1e-9 && std::abs(ref - closed) <= 1e-12, d.str()};
}

Verdict criterion4() {
  auto cfg = load_run_config(kConfigs / "astroid_160.json");
  cfg.lambda = 0.0;
  const Problem problem = cfg.problem();
  const auto sol = solve(problem, cfg.disc);
  hygiene.record(sol.diagnostics);
  auto basis = std::make_shared<const BSplineBasis>(
      problem.contour, generate_nodes(problem.contour, cfg.disc.n_B, cfg.disc.order), cfg.disc.order);
  const auto proj = bh_project(problem.rhs, basis, problem.jumps, cfg.disc.eps2, cfg.disc.rule);
  const double diff = max_diff(sol.coefficients(), proj.coefficients());
  return {diff <= 1e-10, "n_B=160, max coefficient difference " + num(diff)};
}

Verdict criterion5() {
  const Contour contour(ConformalMap::preset("astroid"));
  double worst_integral = 0.0;
  for (int m : {2, 3, 4}) {
    const BSplineBasis b(contour, generate_nodes(contour, 40, static_cast<std::size_t>(m)), m);
    for (std::size_t k = 0; k < 40; ++k) {
      complex total = 0.0;
      for (int r = 0; r < m; ++r)
        total += oracle_trapezoid(
            [&](double th) { return b.branch(k, r, contour.point(th)) * contour.tangent_factor(th); },
            b.knots().angle(k + r), b.knots().angle(k + r + 1), 4000);
      worst_integral = std::max(worst_integral, std::abs(total - 1.0));
    }
  }
  const BSplineBasis b4(contour, generate_nodes(contour, 40, 4), 4);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick_k(0, 39);
  std::uniform_int_distribution<int> pick_r(0, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_branch = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t k = pick_k(rng);
    const int r = pick_r(rng);
    const double lo = b4.knots().angle(k + r), hi = b4.knots().angle(k + r + 1);
    const complex s = contour.point(lo + u(rng) * (hi - lo));
    const complex explicit_value = branch_poly_m4(b4.knots(), k, r, s);
    worst_branch = std::max(worst_branch, std::abs(b4.branch(k, r, s) - explicit_value) / std::abs(explicit_value));
  }
  std::size_t off = 0, nonzero_off = 0;
  for (int m : {2, 3, 4}) {
    const BSplineBasis b(contour, generate_nodes(contour, 40, static_cast<std::size_t>(m)), m);
    for (std::size_t k = 0; k < 40; ++k)
      for (int i = 0; i < 800; ++i) {
        const double th = kTwoPi * (i + 0.5) / 800;
        if (b.piece_of(k, th)) continue;
        ++off;
        if (b.eval(k, th) != complex(0.0)) ++nonzero_off;
      }
  }
  std::ostringstream d;
  d << "max |int B - 1| = " << num(worst_integral) << "; m=4 recursion vs explicit " << num(worst_branch) << "; "
    << nonzero_off << " of " << off << " off-support samples nonzero";
  return {worst_integral <= 1e-6 && worst_branch <= 1e-11 && nonzero_off == 0, d.str()};
}

Verdict criterion6() {
  const Contour contour(ConformalMap::preset("astroid"));
  auto basis = std::make_shared<const BSplineBasis>(contour, generate_nodes(contour, 40, 4), 4);
  const std::vector<JumpSet> cases = {JumpSet({0.7 * std::numbers::pi}),
                                      JumpSet({0.7 * std::numbers::pi, 1.3 * std::numbers::pi}),
                                      JumpSet({basis->nodes().angles[9], 4.0})};
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  double worst_coeff = 0.0, worst_jump = 0.0, worst_value = 0.0;
  for (const auto& js : cases)
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<complex> alpha(40), beta(js.size());
      for (auto& a : alpha) a = {g(rng), g(rng)};
      for (auto& b : beta) b = {g(rng), g(rng)};
      const EnrichedSpline s(basis, js, alpha, beta);
      auto value = [s](double theta, complex) { return s(theta); };
      std::vector<Piece> pieces;
      for (std::size_t p = 0; p + 1 < js.breakpoints().size(); ++p)
        pieces.push_back({js.breakpoints()[p], js.breakpoints()[p + 1], value});
      const PiecewiseFn f(contour, pieces, js);
      const auto proj = bh_project(f, basis, js);
      worst_coeff = std::max(worst_coeff, max_diff(proj.coefficients(), s.coefficients()));
      for (std::size_t r = 0; r < js.size(); ++r)
        worst_jump = std::max(worst_jump, std::abs(proj.jump_across(r) - s.jump_across(r)));
      for (double th : uniform_grid(2000)) worst_value = std::max(worst_value, std::abs(proj(th) - s(th)));
    }
  std::ostringstream d;
  d << "15 random elements: coefficients " << num(worst_coeff) << ", values " << num(worst_value) << ", jumps "
    << num(worst_jump);
  return {worst_coeff <= 1e-10 && worst_value <= 1e-10 && worst_jump <= 1e-10, d.str()};
}

Verdict criterion7() {
  const auto cfg = load_run_config(kConfigs / "astroid_160.json");
  const auto rep = run_gibbs_demo(cfg);
  hygiene.record(rep.enriched.solution.diagnostics);
  hygiene.record(rep.plain.solution.diagnostics);
  const double enriched = rep.enriched.errors->near_jump / rep.beta1_abs;
  const double plain = rep.plain.errors->near_jump / rep.beta1_abs;
  std::ostringstream d;
  d << "|beta1|=" << num(rep.beta1_abs) << ", near-jump error / |beta1|: plain " << num(plain) << ", enriched "
    << num(enriched);
  return {plain > 0.25 && enriched < 0.05, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict criterion8() {
  const fs::path dir = fs::temp_directory_path() / "fredholm_acceptance";
  fs::remove_all(dir);
  bool runs_ok = true, identical = true, conditioned = true;
  for (const char* name : {"astroid_160.json", "circle_manufactured.json"}) {
    for (const char* tag : {"a", "b"}) {
      const std::string cmd = "'" + kCli + "' --reproducible --config '" + (kConfigs / name).string() + "' --out '" +
                              (dir / name / tag).string() + "' solve > /dev/null";
      const int status = std::system(cmd.c_str());
      runs_ok = runs_ok && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    }
    for (const char* file : {"solution.csv", "manifest.json"}) {
      const auto a = slurp(dir / name / "a" / file), b = slurp(dir / name / "b" / file);
      identical = identical && !a.empty() && a == b;
    }
    const auto m = nlohmann::json::parse(slurp(dir / name / "a" / "manifest.json"), nullptr, false);
    const bool has = !m.is_discarded() && m.contains("condition_estimate_1norm") &&
                     m["condition_estimate_1norm"].is_number() && m["condition_estimate_1norm"].get<double>() >= 1.0;
    conditioned = conditioned && has;
    if (!m.is_discarded() && m.contains("residual_ok"))
      hygiene.record(m["residual_inf"].get<double>(), m["rhs_inf"].get<double>(), m["residual_ok"].get<bool>());
  }
  fs::remove_all(dir);
  std::ostringstream d;
  d << hygiene.solves << " solves, " << hygiene.residual_failures << " residual failures (worst relative "
    << num(hygiene.worst_relative) << "); condition estimate in manifests: " << (conditioned ? "yes" : "no")
    << "; repeated CLI runs byte-identical: " << (identical && runs_ok ? "yes" : "no");
  return {runs_ok && identical && conditioned && hygiene.residual_failures == 0, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, Verdict (*)()>> criteria = {{1, criterion1}, {2, criterion2}, {3, criterion3},
                                                               {4, criterion4}, {5, criterion5}, {6, criterion6},
                                                               {7, criterion7}, {8, criterion8}};
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    Verdict v{false, ""};
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << v.detail << std::endl;
  }
  std::cout << (8 - failures) << "/8 criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
