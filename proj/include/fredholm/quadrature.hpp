#pragma once

// Contour integrals behind the collocation matrix, all computed in theta space
// with the generalized trapezoidal rule.

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "fredholm/basis.hpp"
#include "fredholm/contour.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/expr.hpp"
#include "fredholm/piecewise.hpp"
#include "fredholm/trapezoid.hpp"

namespace fredholm {

/// Continuous kernel K(t, s) given as an expression in t and s.
class Kernel {
 public:
  explicit Kernel(expr::Expression e) : expr_(std::move(e)), fn_(expr_.compile({"t", "s"})) {}
  static Kernel parse(std::string_view text) { return Kernel(expr::Expression::parse(text)); }

  complex operator()(complex t, complex s) const { return fn_({t, s}); }
  const expr::Expression& expression() const { return expr_; }

 private:
  expr::Expression expr_;
  expr::CompiledExpression fn_;
};

/// Piece r of B_k at s; order 4 uses the explicit cubic formulas.
inline complex branch_value(const BSplineBasis& basis, std::size_t k, int r, complex s) {
  if (basis.order() == 4) return branch_poly_m4(basis.knots(), k, r, s);
  return basis.branch(k, r, s);
}

/// I^1_k(t_c) = integral over Gamma of K(t_c, s) B_{m,k}(s) ds, one trapezoid per support arc.
inline complex integral_I1(const BSplineBasis& basis, std::size_t k, complex t_c, const Kernel& kernel,
                           const QuadratureConfig& cfg) {
  const Contour& c = basis.contour();
  complex total(0.0);
  for (int r = 0; r < basis.order(); ++r) {
    const double a = basis.knots().angle(k + r), b = basis.knots().angle(k + r + 1);
    total += trapezoid(
        [&](double theta) {
          const complex s = c.point(theta);
          return kernel(t_c, s) * branch_value(basis, k, r, s) * c.tangent_factor(theta);
        },
        a, b, cfg.N);
  }
  return total;
}

/// I^2_r(t_c) = integral of K(t_c, s) over the arc from the jump point to the reference point.
/// The arc is cut at the given breakpoints (normally the knot angles) and each segment gets N subintervals.
inline complex integral_I2(const Contour& contour, double jump_angle, complex t_c, const Kernel& kernel,
                           const QuadratureConfig& cfg, std::span<const double> breaks = {}) {
  if (jump_angle >= kTwoPi - kAngleTolerance) return 0.0;
  auto q = [&](double theta) { return kernel(t_c, contour.point(theta)) * contour.tangent_factor(theta); };
  complex total(0.0);
  double lo = jump_angle;
  for (double b : breaks) {
    if (b <= lo + kAngleTolerance || b >= kTwoPi - kAngleTolerance) continue;
    total += trapezoid(q, lo, b, cfg.N);
    lo = b;
  }
  return total + trapezoid(q, lo, kTwoPi, cfg.N);
}

/// Discretized operator (lambda K_N g)(theta). The trapezoid over [0, 2pi] is split at g's piece
/// boundaries, each piece sampled with N subintervals from its own formula.
inline std::function<complex(double)> apply_discrete_operator(const Kernel& kernel, complex lambda,
                                                             const PiecewiseFn& g, std::size_t N) {
  if (!g.analytic()) throw ConfigError("the discrete operator needs an analytic function");
  struct Segment {
    double h;
    std::vector<complex> s, weighted;  // contour points, g * ds/dtheta
  };
  auto segments = std::make_shared<std::vector<Segment>>();
  const Contour& c = g.contour();
  for (std::size_t p = 0; p < g.pieces().size(); ++p) {
    const auto& piece = g.pieces()[p];
    Segment seg{(piece.hi - piece.lo) / static_cast<double>(N), {}, {}};
    for (std::size_t i = 0; i <= N; ++i) {
      const double theta = i == N ? piece.hi : piece.lo + static_cast<double>(i) * seg.h;
      seg.s.push_back(c.point(theta));
      seg.weighted.push_back(g.eval_piece(p, theta) * c.tangent_factor(theta));
    }
    segments->push_back(std::move(seg));
  }
  auto contour = std::make_shared<Contour>(c);
  return [kernel, lambda, segments, contour](double theta) {
    if (lambda == complex(0.0)) return complex(0.0);
    const complex t = contour->point(theta);
    std::vector<complex> values;
    complex total(0.0);
    for (const auto& seg : *segments) {
      values.resize(seg.s.size());
      for (std::size_t i = 0; i < seg.s.size(); ++i) values[i] = kernel(t, seg.s[i]) * seg.weighted[i];
      total += trapezoid_sum(values, seg.h);
    }
    return lambda * total;
  };
}

/// One Richardson step on top of apply_discrete_operator: (4 A_{2N} - A_N) / 3.
inline std::function<complex(double)> apply_operator_extrapolated(const Kernel& kernel, complex lambda,
                                                                 const PiecewiseFn& g, std::size_t N) {
  auto coarse = apply_discrete_operator(kernel, lambda, g, N);
  auto fine = apply_discrete_operator(kernel, lambda, g, 2 * N);
  return [coarse, fine](double theta) { return (4.0 * fine(theta) - coarse(theta)) / 3.0; };
}

}  // namespace fredholm
