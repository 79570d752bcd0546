#pragma once

// Approximation operators on the contour: periodic B-spline interpolation,
// the B-spline-Heaviside projector, and the Lagrange-Heaviside interpolant.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "fredholm/basis.hpp"
#include "fredholm/collocation_points.hpp"
#include "fredholm/contour.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/linalg.hpp"
#include "fredholm/piecewise.hpp"

namespace fredholm {

/// sum_k alpha_k B_{m,k} + sum_r beta_r H_r. With no jumps this is a plain spline interpolant.
class EnrichedSpline {
 public:
  EnrichedSpline(std::shared_ptr<const BSplineBasis> basis, JumpSet jumps, std::vector<complex> alpha,
                 std::vector<complex> beta)
      : basis_(std::move(basis)), jumps_(std::move(jumps)), alpha_(std::move(alpha)), beta_(std::move(beta)) {
    if (alpha_.size() != basis_->size()) throw ConfigError("spline coefficient count mismatch");
    if (beta_.size() != jumps_.size()) throw ConfigError("jump coefficient count mismatch");
  }

  const BSplineBasis& basis() const { return *basis_; }
  std::shared_ptr<const BSplineBasis> basis_ptr() const { return basis_; }
  const JumpSet& jumps() const { return jumps_; }
  const std::vector<complex>& alpha() const { return alpha_; }
  const std::vector<complex>& beta() const { return beta_; }

  /// (alpha_1..alpha_nB, beta_1..beta_nd).
  std::vector<complex> coefficients() const {
    std::vector<complex> x(alpha_);
    x.insert(x.end(), beta_.begin(), beta_.end());
    return x;
  }

  complex spline_part(double theta) const {
    const std::size_t n = basis_->size();
    const std::size_t a = arc_index(basis_->nodes(), theta);
    const complex t = basis_->contour().point(theta);
    complex sum(0.0);
    for (int r = 0; r < basis_->order(); ++r) {
      const std::size_t k = (a + n - static_cast<std::size_t>(r)) % n;
      if (alpha_[k] != complex(0.0)) sum += alpha_[k] * basis_->branch(k, r, t);
    }
    return sum;
  }

  complex heaviside_part(double theta) const {
    complex sum(0.0);
    for (std::size_t r = 0; r < beta_.size(); ++r) sum += beta_[r] * Heaviside(jumps_[r])(theta);
    return sum;
  }

  complex operator()(double theta) const { return spline_part(theta) + heaviside_part(theta); }

  /// Jump of the Heaviside part across jump r: exactly beta_r.
  complex heaviside_jump(std::size_t r) const {
    const double d = jumps_[r];
    complex jump(0.0);
    for (std::size_t s = 0; s < beta_.size(); ++s) {
      const double right = Heaviside(jumps_[s])(d);
      const double left = jumps_[s] < d - kAngleTolerance ? 1.0 : 0.0;
      if (right != left) jump += beta_[s] * (right - left);
    }
    return jump;
  }

  /// Full jump across jump r: the spline pieces on either side are compared at the same point.
  complex jump_across(std::size_t r) const {
    const double d = jumps_[r];
    const std::size_t n = basis_->size();
    const std::size_t right_arc = arc_index(basis_->nodes(), d);
    const bool at_knot = angular_distance(basis_->nodes().angles[right_arc], d) <= kAngleTolerance;
    complex spline_jump(0.0);
    if (at_knot) {
      const complex t = basis_->contour().point(d);
      const std::size_t left_arc = (right_arc + n - 1) % n;
      for (int q = 0; q < basis_->order(); ++q) {
        const std::size_t kr = (right_arc + n - q) % n, kl = (left_arc + n - q) % n;
        spline_jump += alpha_[kr] * basis_->branch(kr, q, t) - alpha_[kl] * basis_->branch(kl, q, t);
      }
    }
    return spline_jump + heaviside_jump(r);
  }

 private:
  std::shared_ptr<const BSplineBasis> basis_;
  JumpSet jumps_;
  std::vector<complex> alpha_, beta_;
};

using SplineInterpolant = EnrichedSpline;
using EnrichedInterpolant = EnrichedSpline;

/// Rows: basis functions then Heaviside steps, evaluated at each collocation angle.
inline ComplexMatrix enriched_design_matrix(const BSplineBasis& basis, const JumpSet& jumps,
                                            std::span<const double> angles) {
  const std::size_t n_B = basis.size();
  ComplexMatrix m(angles.size(), n_B + jumps.size());
  for (std::size_t j = 0; j < angles.size(); ++j) {
    for (std::size_t k = 0; k < n_B; ++k) m(j, k) = basis.eval(k, angles[j]);
    for (std::size_t r = 0; r < jumps.size(); ++r) m(j, n_B + r) = Heaviside(jumps[r])(angles[j]);
  }
  return m;
}

/// Solves sum_j a_j B_{m,j}(t_k) = v(t_k) at the basis nodes.
inline SplineInterpolant spline_interpolate(std::span<const complex> values,
                                            std::shared_ptr<const BSplineBasis> basis) {
  if (values.size() != basis->size()) throw ConfigError("one value per node is required");
  const auto m = enriched_design_matrix(*basis, JumpSet{}, basis->nodes().angles);
  try {
    LuFactorization lu(m, 1e-13);
    return EnrichedSpline(std::move(basis), JumpSet{}, lu.solve(values), {});
  } catch (const SingularSystemError& e) {
    throw SingularSystemError("spline interpolation matrix is singular", e.step());
  }
}

/// B-spline-Heaviside projection: the element of span{B_k, H_r} that matches f at the
/// collocation points. Jump rows match the right limit of f.
inline EnrichedInterpolant bh_project(const PiecewiseFn& f, std::shared_ptr<const BSplineBasis> basis,
                                      const JumpSet& jumps, double eps2 = 0.01,
                                      CollocationRule rule = CollocationRule::Offset) {
  const auto pts = collocation_points(basis->nodes(), basis->order(), jumps, eps2, rule);
  const auto m = enriched_design_matrix(*basis, jumps, pts.angles);
  const auto rhs = sample_at_collocation(f, pts, jumps);
  LuFactorization lu(m, 1e-13);
  auto x = lu.solve(rhs);
  std::vector<complex> alpha(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(basis->size()));
  std::vector<complex> beta(x.begin() + static_cast<std::ptrdiff_t>(basis->size()), x.end());
  return EnrichedSpline(std::move(basis), jumps, std::move(alpha), std::move(beta));
}

/// Decomposed form B_n f_C + f_H: beta are the exact jumps of f, the spline interpolates f_C at the nodes.
inline EnrichedInterpolant bh_project_decomposed(const PiecewiseFn& f, std::shared_ptr<const BSplineBasis> basis) {
  const auto dec = decompose(f);
  std::vector<complex> values(basis->size());
  for (std::size_t j = 0; j < values.size(); ++j) values[j] = dec.continuous_part(basis->nodes().angles[j]);
  auto spline = spline_interpolate(values, basis);
  return EnrichedSpline(std::move(basis), f.jumps(), spline.alpha(), dec.jump_coeffs());
}

/// Largest node count accepted by the global Lagrange variant.
inline constexpr std::size_t kMaxLagrangeNodes = 64;

/// Barycentric Lagrange interpolant on complex nodes plus an optional Heaviside part.
class LagrangeInterpolant {
 public:
  LagrangeInterpolant(Contour contour, std::vector<complex> nodes, std::vector<complex> values, JumpSet jumps,
                      std::vector<complex> beta)
      : contour_(std::move(contour)),
        nodes_(std::move(nodes)),
        values_(std::move(values)),
        weights_(nodes_.size()),
        jumps_(std::move(jumps)),
        beta_(std::move(beta)) {
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      complex p(1.0);
      for (std::size_t k = 0; k < nodes_.size(); ++k)
        if (k != j) p *= nodes_[j] - nodes_[k];
      if (p == complex(0.0)) throw DegenerateKnotError("coincident Lagrange nodes");
      weights_[j] = 1.0 / p;
    }
  }

  const std::vector<complex>& weights() const { return weights_; }

  complex polynomial_part(complex t) const {
    complex num(0.0), den(0.0);
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const complex diff = t - nodes_[j];
      if (diff == complex(0.0)) return values_[j];
      const complex w = weights_[j] / diff;
      num += w * values_[j];
      den += w;
    }
    return num / den;
  }

  complex operator()(double theta) const {
    complex v = polynomial_part(contour_.point(theta));
    for (std::size_t r = 0; r < beta_.size(); ++r) v += beta_[r] * Heaviside(jumps_[r])(theta);
    return v;
  }

 private:
  Contour contour_;
  std::vector<complex> nodes_, values_, weights_;
  JumpSet jumps_;
  std::vector<complex> beta_;
};

/// L_{n_B} f_C + f_H on n_B quasi-uniform nodes.
inline LagrangeInterpolant lagrange_heaviside(const PiecewiseFn& f, std::size_t n_B) {
  if (n_B > kMaxLagrangeNodes)
    throw ConfigError("global Lagrange interpolation is limited to " + std::to_string(kMaxLagrangeNodes) +
                      " nodes; use the periodic B-spline variant (bh_project) instead");
  const NodeSet nodes = generate_nodes(f.contour(), n_B, 1);
  const auto dec = decompose(f);
  std::vector<complex> values(n_B);
  for (std::size_t j = 0; j < n_B; ++j) values[j] = dec.continuous_part(nodes.angles[j]);
  return LagrangeInterpolant(f.contour(), nodes.points, std::move(values), f.jumps(), dec.jump_coeffs());
}

/// Plain global Lagrange interpolant of f at the nodes, without jump enrichment.
inline LagrangeInterpolant lagrange_plain(const PiecewiseFn& f, std::size_t n_B) {
  if (n_B > kMaxLagrangeNodes) throw ConfigError("global Lagrange interpolation node limit exceeded");
  const NodeSet nodes = generate_nodes(f.contour(), n_B, 1);
  std::vector<complex> values(n_B);
  for (std::size_t j = 0; j < n_B; ++j) values[j] = f.eval(nodes.angles[j]);
  return LagrangeInterpolant(f.contour(), nodes.points, std::move(values), JumpSet{}, {});
}

}  // namespace fredholm
