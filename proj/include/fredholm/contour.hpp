#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fredholm/errors.hpp"
#include "fredholm/expr.hpp"

namespace fredholm {

using complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle to [0, 2pi).
inline double canonical_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Reduces an angle to (0, 2pi]; the reference point is reported as 2pi.
inline double closed_angle(double theta) {
  double r = canonical_angle(theta);
  return r == 0.0 ? kTwoPi : r;
}

/// Distance between two angles on the circle.
inline double angular_distance(double a, double b) {
  double d = std::abs(canonical_angle(a) - canonical_angle(b));
  return std::min(d, kTwoPi - d);
}

/// Conformal map psi(w) from the unit circle onto the contour, with its derivative.
class ConformalMap {
 public:
  /// If `derivative` is omitted it is obtained by symbolic differentiation.
  explicit ConformalMap(expr::Expression map, std::optional<expr::Expression> derivative = std::nullopt)
      : map_(std::move(map)),
        derivative_(derivative ? std::move(*derivative) : map_.differentiate("w")),
        map_fn_(map_.compile({"w"})),
        derivative_fn_(derivative_.compile({"w"})) {}

  static ConformalMap from_strings(std::string_view map, std::optional<std::string_view> derivative = {}) {
    std::optional<expr::Expression> d;
    if (derivative) d = expr::Expression::parse(*derivative);
    return ConformalMap(expr::Expression::parse(map), std::move(d));
  }

  /// Built-in maps: "circle" (psi(w) = w) and "astroid" (psi(w) = w + 1/(3w^3)).
  static ConformalMap preset(std::string_view name) {
    if (name == "circle") return from_strings("w");
    if (name == "astroid") return from_strings("w+1/(3*w^3)");
    throw ConfigError("unknown contour preset '" + std::string(name) + "'");
  }

  complex operator()(complex w) const { return map_fn_({w}); }
  complex derivative(complex w) const { return derivative_fn_({w}); }

  const expr::Expression& map_expression() const { return map_; }
  const expr::Expression& derivative_expression() const { return derivative_; }

 private:
  expr::Expression map_;
  expr::Expression derivative_;
  expr::CompiledExpression map_fn_;
  expr::CompiledExpression derivative_fn_;
};

/// Closed contour Gamma = psi(unit circle), parametrized by theta measured from the reference point.
class Contour {
 public:
  explicit Contour(ConformalMap map, double reference_angle = 0.0)
      : map_(std::move(map)), reference_angle_(reference_angle) {}

  const ConformalMap& map() const { return map_; }
  double reference_angle() const { return reference_angle_; }

  complex circle_point(double theta) const { return std::polar(1.0, reference_angle_ + theta); }

  /// psi(e^{i theta}).
  complex point(double theta) const {
    try {
      return map_(circle_point(theta));
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string(e.what()) + " evaluating contour point at theta=" +
                            expr::detail::format_double(theta));
    }
  }

  /// psi'(e^{i theta}) * i e^{i theta}, i.e. ds/dtheta along the contour.
  complex tangent_factor(double theta) const {
    const complex w = circle_point(theta);
    try {
      return map_.derivative(w) * complex(0.0, 1.0) * w;
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string(e.what()) + " evaluating tangent factor at theta=" +
                            expr::detail::format_double(theta));
    }
  }

  /// Largest discrepancy between tangent_factor and a central difference of point(),
  /// scaled by max(1, |tangent_factor|), over `samples` equispaced angles.
  double derivative_consistency(int samples, double step = 1e-6) const {
    double worst = 0.0;
    for (int j = 0; j < samples; ++j) {
      const double theta = kTwoPi * (j + 0.37) / samples;
      const complex fd = (point(theta + step) - point(theta - step)) / (2.0 * step);
      const complex tf = tangent_factor(theta);
      worst = std::max(worst, std::abs(tf - fd) / std::max(1.0, std::abs(tf)));
    }
    return worst;
  }

  /// Checks that `samples` equispaced circle points have pairwise distinct images.
  bool sampled_injective(int samples) const {
    std::vector<complex> pts(samples);
    for (int j = 0; j < samples; ++j) pts[j] = point(kTwoPi * j / samples);
    std::sort(pts.begin(), pts.end(), [](complex a, complex b) {
      return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    for (int j = 1; j < samples; ++j)
      if (pts[j] == pts[j - 1]) return false;
    return true;
  }

 private:
  ConformalMap map_;
  double reference_angle_;
};

/// Quasi-uniform nodes t_j = psi(e^{i theta_j}), theta_j = 2pi j / n_B (0-based j).
struct NodeSet {
  std::vector<double> angles;
  std::vector<complex> points;

  std::size_t size() const { return angles.size(); }
  double spacing() const { return kTwoPi / static_cast<double>(angles.size()); }

  /// Minimal Euclidean distance between cyclically consecutive nodes.
  double min_spacing() const {
    double h = std::abs(points.front() - points.back());
    for (std::size_t j = 0; j + 1 < points.size(); ++j) h = std::min(h, std::abs(points[j + 1] - points[j]));
    return h;
  }
};

inline NodeSet generate_nodes(const Contour& contour, std::size_t n_B, std::size_t order = 4) {
  if (n_B < 4 || n_B < order)
    throw ConfigError("node count " + std::to_string(n_B) + " is below max(4, spline order " +
                      std::to_string(order) + ")");
  NodeSet nodes;
  nodes.angles.resize(n_B);
  nodes.points.resize(n_B);
  for (std::size_t j = 0; j < n_B; ++j) {
    nodes.angles[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(n_B);
    nodes.points[j] = contour.point(nodes.angles[j]);
  }
  if (!(nodes.min_spacing() > 0.0)) throw DegenerateKnotError("contour nodes are not distinct");
  return nodes;
}

/// 0-based arc index j with theta in [theta_j, theta_{j+1}) after reduction mod 2pi.
inline std::size_t arc_index(const NodeSet& nodes, double theta) {
  const std::size_t n = nodes.size();
  const double r = canonical_angle(theta);
  auto j = static_cast<std::size_t>(std::floor(r / kTwoPi * static_cast<double>(n)));
  if (j >= n) j = n - 1;
  if (r < nodes.angles[j]) --j;
  else if (j + 1 < n && r >= nodes.angles[j + 1]) ++j;
  return j;
}

}  // namespace fredholm
