#pragma once

// Collocation solver for  phi(t) - lambda * int_Gamma K(t,s) phi(s) ds = f(t)
// with phi approximated by sum alpha_k B_{m,k} + sum beta_r H_r.
//
// Row j of the system enforces the equation at collocation point t^C_j:
//   B = B1 - lambda * B2,
//   B1[j][k] = B_{m,k}(t^C_j),        B1[j][n_B+r] = H_r(t^C_j),
//   B2[j][k] = I^1_k(t^C_j),          B2[j][n_B+r] = I^2_r(t^C_j).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fredholm/basis.hpp"
#include "fredholm/collocation_points.hpp"
#include "fredholm/contour.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/interp.hpp"
#include "fredholm/linalg.hpp"
#include "fredholm/piecewise.hpp"
#include "fredholm/quadrature.hpp"

namespace fredholm {

struct Problem {
  Contour contour;
  Kernel kernel;
  complex lambda;
  PiecewiseFn rhs;
  JumpSet jumps;
  std::optional<PiecewiseFn> exact;

  Problem(Contour c, Kernel k, complex lam, PiecewiseFn f, JumpSet d, std::optional<PiecewiseFn> phi = std::nullopt)
      : contour(std::move(c)), kernel(std::move(k)), lambda(lam), rhs(std::move(f)), jumps(std::move(d)),
        exact(std::move(phi)) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < 16; ++i) {
      const complex v = kernel(contour.point(u(rng)), contour.point(u(rng)));
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw ConfigError("kernel is not finite on the contour");
    }
  }
};

struct Discretization {
  int order = 4;
  std::size_t n_B = 160;
  QuadratureConfig quad;
  double eps2 = 0.01;
  CollocationRule rule = CollocationRule::Offset;
  unsigned threads = 1;

  void validate() const {
    if (order < 2 || order > 4) throw ConfigError("spline order must be 2, 3 or 4");
    if (n_B < 4 || n_B < static_cast<std::size_t>(order)) throw ConfigError("n_B must be at least max(4, m)");
    if (!(eps2 > 0.0 && eps2 < kTwoPi / static_cast<double>(n_B)))
      throw ConfigError("eps2 must lie in (0, 2pi/n_B)");
    quad.validate();
  }
};

struct CollocationSystem {
  std::shared_ptr<const BSplineBasis> basis;
  JumpSet jumps;
  CollocationPoints points;
  complex lambda;
  ComplexMatrix b1, b2, matrix;
  std::vector<complex> rhs;
  double assembly_seconds = 0.0;

  std::size_t size() const { return rhs.size(); }
};

struct SolveDiagnostics {
  double residual_inf = 0.0;
  double rhs_inf = 0.0;
  double condition_estimate_1norm = 0.0;
  double min_pivot_ratio = 0.0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;

  bool residual_ok(double rel = 1e-10) const { return residual_inf <= rel * rhs_inf; }
};

struct Solution {
  EnrichedSpline phi;
  SolveDiagnostics diagnostics;

  complex operator()(double theta) const { return phi(theta); }
  std::vector<complex> coefficients() const { return phi.coefficients(); }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs body(j) for j in [0, n) on `threads` workers with a fixed interleaved partition.
template <class F>
void parallel_rows(std::size_t n, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t j = 0; j < n; ++j) body(j);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t j = w; j < n; j += threads) body(j);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline CollocationPoints collocation_points(const Discretization& disc, const NodeSet& nodes, const JumpSet& jumps) {
  return collocation_points(nodes, disc.order, jumps, disc.eps2, disc.rule);
}

inline CollocationSystem assemble(const Problem& problem, const Discretization& disc) {
  disc.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Contour& contour = problem.contour;
  auto basis = std::make_shared<const BSplineBasis>(contour, generate_nodes(contour, disc.n_B, disc.order),
                                                    disc.order);
  const std::size_t n_B = disc.n_B, n_d = problem.jumps.size(), n = n_B + n_d;
  const int m = disc.order;
  const std::size_t N = disc.quad.N;

  CollocationSystem sys{basis, problem.jumps, collocation_points(disc, basis->nodes(), problem.jumps),
                        problem.lambda, {}, {}, {}, {}};
  sys.b1 = enriched_design_matrix(*basis, problem.jumps, sys.points.angles);
  sys.b2 = ComplexMatrix(n, n);

  // Quadrature grids per arc: contour points and, for each piece r living on the arc,
  // branch value times ds/dtheta. None of this depends on the collocation row.
  struct ArcGrid {
    double h;
    std::vector<complex> s, tf;
    std::vector<std::vector<complex>> weight;  // [r][i]
  };
  std::vector<ArcGrid> arcs(n_B);
  for (std::size_t a = 0; a < n_B; ++a) {
    const double lo = basis->knots().angle(a), hi = basis->knots().angle(a + 1);
    ArcGrid& g = arcs[a];
    g.h = (hi - lo) / static_cast<double>(N);
    g.s.resize(N + 1);
    g.tf.resize(N + 1);
    g.weight.assign(m, std::vector<complex>(N + 1));
    for (std::size_t i = 0; i <= N; ++i) {
      const double theta = i == N ? hi : lo + static_cast<double>(i) * g.h;
      g.s[i] = contour.point(theta);
      g.tf[i] = contour.tangent_factor(theta);
      for (int r = 0; r < m; ++r) {
        const std::size_t k = (a + n_B - static_cast<std::size_t>(r)) % n_B;
        g.weight[r][i] = branch_value(*basis, k, r, g.s[i]) * g.tf[i];
      }
    }
  }
  // I^2 runs over [theta_d, 2pi] cut at the knots: whole arcs reuse the arc grids, and a jump
  // strictly inside an arc gets its own partial segment.
  struct JumpGrid {
    std::size_t first_full_arc = 0;
    double h = 0.0;
    std::vector<complex> s, tf;  // partial segment, empty if theta_d is a knot
  };
  std::vector<JumpGrid> jump_grids(n_d);
  for (std::size_t r = 0; r < n_d; ++r) {
    const double d = problem.jumps[r];
    JumpGrid& g = jump_grids[r];
    if (d >= kTwoPi - kAngleTolerance) {
      g.first_full_arc = n_B;  // empty arc: I^2 = 0
      continue;
    }
    const std::size_t a = arc_index(basis->nodes(), d);
    const double lo = basis->knots().angle(a), hi = basis->knots().angle(a + 1);
    if (d - lo <= kAngleTolerance || hi - d <= kAngleTolerance) {
      g.first_full_arc = d - lo <= kAngleTolerance ? a : a + 1;
      continue;
    }
    g.first_full_arc = a + 1;
    g.h = (hi - d) / static_cast<double>(N);
    for (std::size_t i = 0; i <= N; ++i) {
      const double theta = i == N ? hi : d + static_cast<double>(i) * g.h;
      g.s.push_back(contour.point(theta));
      g.tf.push_back(contour.tangent_factor(theta));
    }
  }

  detail::parallel_rows(n, disc.threads, [&](std::size_t j) {
    const double theta_c = sys.points.angles[j];
    const complex t_c = contour.point(theta_c);
    std::vector<std::vector<complex>> kvals(n_B, std::vector<complex>(N + 1));
    for (std::size_t a = 0; a < n_B; ++a)
      for (std::size_t i = 0; i <= N; ++i) kvals[a][i] = problem.kernel(t_c, arcs[a].s[i]);
    std::vector<complex> buf(N + 1);
    try {
      for (std::size_t k = 0; k < n_B; ++k) {
        complex total(0.0);
        for (int r = 0; r < m; ++r) {
          const std::size_t a = (k + static_cast<std::size_t>(r)) % n_B;
          for (std::size_t i = 0; i <= N; ++i) buf[i] = kvals[a][i] * arcs[a].weight[r][i];
          total += trapezoid_sum(buf, arcs[a].h);
        }
        if (!std::isfinite(total.real()) || !std::isfinite(total.imag()))
          throw EvaluationError("non-finite I1 entry");
        sys.b2(j, k) = total;
      }
      for (std::size_t r = 0; r < n_d; ++r) {
        const JumpGrid& g = jump_grids[r];
        complex total(0.0);
        if (!g.s.empty()) {
          for (std::size_t i = 0; i <= N; ++i) buf[i] = problem.kernel(t_c, g.s[i]) * g.tf[i];
          total += trapezoid_sum(buf, g.h);
        }
        for (std::size_t a = g.first_full_arc; a < n_B; ++a) {
          for (std::size_t i = 0; i <= N; ++i) buf[i] = kvals[a][i] * arcs[a].tf[i];
          total += trapezoid_sum(buf, arcs[a].h);
        }
        sys.b2(j, n_B + r) = total;
      }
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string(e.what()) + " (assembling row " + std::to_string(j) + ")");
    }
  });

  sys.matrix = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) sys.matrix(j, k) = sys.b1(j, k) - problem.lambda * sys.b2(j, k);
  sys.rhs = sample_at_collocation(problem.rhs, sys.points, problem.jumps);
  sys.assembly_seconds = detail::seconds_since(t0);
  return sys;
}

inline Solution solve(const CollocationSystem& sys) {
  const auto t0 = std::chrono::steady_clock::now();
  LuFactorization lu(sys.matrix, 1e-14);
  auto x = lu.solve(sys.rhs);
  SolveDiagnostics diag;
  diag.residual_inf = residual_inf(sys.matrix, x, sys.rhs);
  diag.rhs_inf = norm_inf(sys.rhs);
  diag.condition_estimate_1norm = lu.condition_estimate_1norm();
  diag.min_pivot_ratio = lu.min_pivot_ratio();
  diag.assembly_seconds = sys.assembly_seconds;
  const std::size_t n_B = sys.basis->size();
  std::vector<complex> alpha(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_B));
  std::vector<complex> beta(x.begin() + static_cast<std::ptrdiff_t>(n_B), x.end());
  diag.solve_seconds = detail::seconds_since(t0);
  return Solution{EnrichedSpline(sys.basis, sys.jumps, std::move(alpha), std::move(beta)), diag};
}

inline Solution solve(const Problem& problem, const Discretization& disc) { return solve(assemble(problem, disc)); }

inline complex evaluate_solution(const Solution& sol, double theta) { return sol(theta); }

/// Same pipeline with no Heaviside columns: phi is sought in the spline space alone.
inline Solution solve_without_enrichment(const Problem& problem, const Discretization& disc) {
  Problem plain = problem;
  plain.jumps = JumpSet{};
  return solve(plain, disc);
}

/// Problem whose exact solution is phi_exact: f = phi - lambda K phi, with K phi computed
/// piecewise by the oracle-resolution trapezoid rule plus one Richardson step.
inline Problem manufactured_problem(const Contour& contour, const Kernel& kernel, complex lambda,
                                    const PiecewiseFn& phi_exact, const QuadratureConfig& cfg) {
  auto k_phi = apply_operator_extrapolated(kernel, lambda, phi_exact, cfg.oracle_N);
  std::vector<Piece> pieces;
  for (std::size_t p = 0; p < phi_exact.pieces().size(); ++p) {
    const auto& src = phi_exact.pieces()[p];
    auto value = src.value;
    pieces.push_back({src.lo, src.hi, [value, k_phi](double theta, complex t) { return value(theta, t) - k_phi(theta); }});
  }
  PiecewiseFn f(contour, std::move(pieces), phi_exact.jumps());
  return Problem(contour, kernel, lambda, std::move(f), phi_exact.jumps(), phi_exact);
}

/// Errors of an approximation against an exact function on the grid theta_i = 2pi i / G, i = 1..G.
struct GridErrors {
  double max_excluding_wrap = 0.0;  // excludes half-width 2 eps2 around every jump and the reference point
  double max_including_wrap = 0.0;  // excludes only the jumps away from the reference point
  double near_jump = 0.0;           // within 3 knot spacings of an interior jump, outside the exclusion
  double away = 0.0;                // at least 0.5 from every jump and the reference point
};

inline GridErrors measure_grid_errors(const std::function<complex(double)>& approx, const PiecewiseFn& exact,
                                      const JumpSet& jumps, double eps2, std::size_t grid_size, std::size_t n_B) {
  GridErrors out;
  const double excl = 2.0 * eps2, near = 3.0 * kTwoPi / static_cast<double>(n_B);
  std::vector<double> interior;
  for (double d : jumps.angles())
    if (angular_distance(d, 0.0) > kAngleTolerance) interior.push_back(d);
  for (std::size_t i = 1; i <= grid_size; ++i) {
    const double theta = kTwoPi * static_cast<double>(i) / static_cast<double>(grid_size);
    const double err = std::abs(approx(theta) - exact.eval(theta));
    const double d_ref = angular_distance(theta, 0.0);
    double d_int = INFINITY;
    for (double d : interior) d_int = std::min(d_int, angular_distance(theta, d));
    if (d_int > excl) {
      out.max_including_wrap = std::max(out.max_including_wrap, err);
      if (d_ref > excl) {
        out.max_excluding_wrap = std::max(out.max_excluding_wrap, err);
        if (d_int <= near) out.near_jump = std::max(out.near_jump, err);
      }
    }
    if (d_int >= 0.5 && d_ref >= 0.5) out.away = std::max(out.away, err);
  }
  return out;
}

}  // namespace fredholm
