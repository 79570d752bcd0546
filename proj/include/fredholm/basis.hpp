#pragma once

// Periodic B-splines with complex knots on the contour and Heaviside steps.
//
// Knots are the contour nodes t_0..t_{n-1}, extended periodically by
// t_{n+k} = t_k with angles theta_{n+k} = theta_k + 2pi. B_k has support on the
// parameter window [theta_k, theta_{k+m}) and restricts to a polynomial in the
// complex variable t on each of its m arcs; piece r lives on arc k+r.
//
// The recursion carries the factor m/(m-1), so every B_k integrates to one
// along the contour instead of forming a partition of unity.

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "fredholm/contour.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/trapezoid.hpp"

namespace fredholm {

class KnotSet {
 public:
  KnotSet(const NodeSet& nodes, int order) : n_(nodes.size()), order_(order) {
    if (order < 1) throw ConfigError("spline order must be positive");
    if (static_cast<std::size_t>(order) > n_) throw ConfigError("spline order exceeds node count");
    points_.resize(n_ + order + 1);
    angles_.resize(n_ + order + 1);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      points_[i] = nodes.points[i % n_];
      angles_[i] = nodes.angles[i % n_] + (i >= n_ ? kTwoPi : 0.0);
    }
    for (std::size_t j = 0; j < n_; ++j)
      for (int o = 1; o <= order; ++o)
        if (points_[j + o] == points_[j])
          throw DegenerateKnotError("coincident knots " + std::to_string(j) + " and " + std::to_string(j + o));
  }

  std::size_t size() const { return n_; }
  int order() const { return order_; }
  /// Extended knot t_i, 0 <= i <= n + m.
  complex point(std::size_t i) const { return points_[i]; }
  /// Extended angle theta_i, strictly increasing in i.
  double angle(std::size_t i) const { return angles_[i]; }

 private:
  std::size_t n_;
  int order_;
  std::vector<complex> points_;
  std::vector<double> angles_;
};

/// r-th cubic piece (0-based) of B_{4,k} at s, written out explicitly.
inline complex branch_poly_m4(const KnotSet& knots, std::size_t k, int r, complex s) {
  if (knots.order() != 4) throw ConfigError("explicit branch polynomials require order 4");
  auto t = [&](std::size_t i) { return knots.point(k + i); };
  auto d = [&](std::size_t a, std::size_t b) {
    const complex v = t(a) - t(b);
    if (v == complex(0.0)) throw DegenerateKnotError("zero knot difference in explicit branch");
    return v;
  };
  switch (r) {
    case 0:
      return 4.0 * std::pow(s - t(0), 3) / (d(4, 0) * d(3, 0) * d(2, 0) * d(1, 0));
    case 1: {
      const complex i1 = (s - t(0)) / d(4, 0) *
                         ((s - t(0)) * (t(2) - s) / (d(3, 0) * d(2, 0) * d(2, 1)) +
                          (s - t(1)) * (t(3) - s) / (d(3, 0) * d(3, 1) * d(2, 1)));
      const complex i2 = (t(4) - s) * (s - t(1)) * (s - t(1)) / (d(4, 0) * d(4, 1) * d(3, 1) * d(2, 1));
      return 4.0 * (i1 + i2);
    }
    case 2: {
      const complex i3 = (t(3) - s) * (t(3) - s) * (s - t(0)) / (d(4, 0) * d(3, 0) * d(3, 1) * d(3, 2));
      const complex i4 = (t(4) - s) / d(4, 0) *
                         ((s - t(1)) * (t(3) - s) / (d(4, 1) * d(3, 1) * d(3, 2)) +
                          (s - t(2)) * (t(4) - s) / (d(4, 1) * d(4, 2) * d(3, 2)));
      return 4.0 * (i3 + i4);
    }
    case 3:
      return 4.0 * std::pow(t(4) - s, 3) / (d(4, 0) * d(4, 1) * d(4, 2) * d(4, 3));
    default:
      throw ConfigError("branch index out of range");
  }
}

class BSplineBasis {
 public:
  BSplineBasis(Contour contour, NodeSet nodes, int order)
      : contour_(std::move(contour)), nodes_(std::move(nodes)), knots_(nodes_, order) {}

  std::size_t size() const { return knots_.size(); }
  int order() const { return knots_.order(); }
  const Contour& contour() const { return contour_; }
  const NodeSet& nodes() const { return nodes_; }
  const KnotSet& knots() const { return knots_; }

  /// Value at complex s of the polynomial piece of B_k living on arc k+r, by Cox-de Boor.
  complex branch(std::size_t k, int r, complex s) const {
    check_index(k);
    const int m = order();
    if (r < 0 || r >= m) throw ConfigError("branch index out of range");
    std::array<complex, 16> v{};
    if (m > 16) throw ConfigError("spline order above 16 unsupported");
    v[r] = 1.0 / (knots_.point(k + r + 1) - knots_.point(k + r));
    for (int o = 2; o <= m; ++o) {
      const double lead = static_cast<double>(o) / (o - 1);
      for (int j = 0; j + o <= m; ++j) {
        const complex tj = knots_.point(k + j), tjo = knots_.point(k + j + o);
        v[j] = lead * ((s - tj) * v[j] + (tjo - s) * v[j + 1]) / (tjo - tj);
      }
    }
    return v[0];
  }

  /// Which piece of B_k contains theta, if any.
  std::optional<int> piece_of(std::size_t k, double theta) const {
    const std::size_t a = arc_index(nodes_, theta);
    const std::size_t r = (a + size() - k) % size();
    if (r < static_cast<std::size_t>(order())) return static_cast<int>(r);
    return std::nullopt;
  }

  /// B_{m,k}(psi(e^{i theta})); exactly zero off the support window.
  complex eval(std::size_t k, double theta) const {
    check_index(k);
    const auto r = piece_of(k, theta);
    if (!r) return 0.0;
    return branch(k, *r, contour_.point(theta));
  }

  /// Contour integral of B_k by the trapezoidal rule with N subintervals per arc.
  complex contour_integral(std::size_t k, std::size_t N) const {
    check_index(k);
    complex total(0.0);
    for (int r = 0; r < order(); ++r) {
      const double a = knots_.angle(k + r), b = knots_.angle(k + r + 1);
      total += trapezoid(
          [&](double theta) { return branch(k, r, contour_.point(theta)) * contour_.tangent_factor(theta); }, a, b,
          N);
    }
    return total;
  }

 private:
  void check_index(std::size_t k) const {
    if (k >= size()) throw ConfigError("basis index " + std::to_string(k) + " out of range");
  }

  Contour contour_;
  NodeSet nodes_;
  KnotSet knots_;
};

/// Angle tolerance used when deciding whether two parameter values coincide.
inline constexpr double kAngleTolerance = 1e-12;

/// Heaviside step along the contour: 0 on (0, theta_d), 1 on [theta_d, 2pi].
/// A jump at 2pi is supported only at the closing point itself.
class Heaviside {
 public:
  explicit Heaviside(double jump_angle) : jump_angle_(jump_angle) {
    if (!(jump_angle > 0.0 && jump_angle <= kTwoPi)) throw ConfigError("jump angle must lie in (0, 2pi]");
  }

  double jump_angle() const { return jump_angle_; }

  double operator()(double theta) const {
    return closed_angle(theta) >= jump_angle_ - kAngleTolerance ? 1.0 : 0.0;
  }

 private:
  double jump_angle_;
};

}  // namespace fredholm
