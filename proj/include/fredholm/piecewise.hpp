#pragma once

// Left-continuous piecewise functions on the contour with a finite jump set,
// their continuous/Heaviside decomposition, and sampled piecewise-Hoelder norms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fredholm/basis.hpp"
#include "fredholm/contour.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/expr.hpp"

namespace fredholm {

/// Sorted, pairwise distinct jump angles in (0, 2pi].
class JumpSet {
 public:
  JumpSet() = default;
  explicit JumpSet(std::vector<double> angles) : angles_(std::move(angles)) {
    for (std::size_t r = 0; r < angles_.size(); ++r) {
      if (!(angles_[r] > 0.0 && angles_[r] <= kTwoPi + kAngleTolerance))
        throw ConfigError("jump angle " + expr::detail::format_double(angles_[r]) + " outside (0, 2pi]");
      angles_[r] = std::min(angles_[r], kTwoPi);
      if (r > 0 && !(angles_[r] > angles_[r - 1] + kAngleTolerance))
        throw ConfigError("jump angles must be strictly increasing");
    }
  }

  std::size_t size() const { return angles_.size(); }
  bool empty() const { return angles_.empty(); }
  double operator[](std::size_t r) const { return angles_[r]; }
  const std::vector<double>& angles() const { return angles_; }

  /// Index of the jump at theta (mod 2pi), if any.
  std::optional<std::size_t> find(double theta) const {
    for (std::size_t r = 0; r < angles_.size(); ++r)
      if (angular_distance(theta, angles_[r]) <= kAngleTolerance) return r;
    return std::nullopt;
  }

  /// Arc breakpoints {0} U jumps U {2pi}.
  std::vector<double> breakpoints() const {
    std::vector<double> b{0.0};
    for (double a : angles_)
      if (a < kTwoPi - kAngleTolerance) b.push_back(a);
    b.push_back(kTwoPi);
    return b;
  }

 private:
  std::vector<double> angles_;
};

/// Value of a piece at parameter theta and contour point t.
using PieceFunction = std::function<complex(double theta, complex t)>;

struct Piece {
  double lo;  // open end
  double hi;  // closed end
  PieceFunction value;
};

class PiecewiseFn {
 public:
  /// Analytic pieces; intervals (lo, hi] must partition (0, 2pi] with interior
  /// boundaries drawn from the jump set.
  PiecewiseFn(Contour contour, std::vector<Piece> pieces, JumpSet jumps)
      : contour_(std::make_shared<Contour>(std::move(contour))), pieces_(std::move(pieces)), jumps_(std::move(jumps)) {
    if (pieces_.empty()) throw ConfigError("piecewise function needs at least one piece");
    if (std::abs(pieces_.front().lo) > kAngleTolerance) throw ConfigError("first piece must start at 0");
    if (std::abs(pieces_.back().hi - kTwoPi) > kAngleTolerance) throw ConfigError("last piece must end at 2pi");
    pieces_.front().lo = 0.0;
    pieces_.back().hi = kTwoPi;
    for (std::size_t p = 0; p < pieces_.size(); ++p) {
      if (!(pieces_[p].hi > pieces_[p].lo)) throw ConfigError("piece intervals must be non-empty");
      if (p + 1 < pieces_.size()) {
        if (std::abs(pieces_[p].hi - pieces_[p + 1].lo) > kAngleTolerance)
          throw ConfigError("pieces must be contiguous");
        if (!jumps_.find(pieces_[p].hi))
          throw ConfigError("piece boundary " + expr::detail::format_double(pieces_[p].hi) + " is not a jump angle");
        pieces_[p + 1].lo = pieces_[p].hi;
      }
    }
  }

  /// Sampled data at node angles plus the (left-continuous) values at each jump angle.
  static PiecewiseFn from_samples(Contour contour, std::vector<double> node_angles, std::vector<complex> values,
                                  JumpSet jumps, std::vector<complex> jump_values) {
    if (node_angles.size() != values.size() || node_angles.empty())
      throw ConfigError("sample table needs matching, non-empty angle and value columns");
    if (jump_values.size() != jumps.size()) throw ConfigError("one jump value is required per jump angle");
    for (std::size_t j = 1; j < node_angles.size(); ++j)
      if (!(node_angles[j] > node_angles[j - 1])) throw ConfigError("sample angles must be strictly increasing");
    PiecewiseFn f(std::move(contour), std::move(jumps));
    f.samples_ = Samples{std::move(node_angles), std::move(values), std::move(jump_values)};
    return f;
  }

  /// Pieces given as expressions in t (and optionally theta).
  struct ExpressionPiece {
    double lo, hi;
    expr::Expression expression;
  };
  static PiecewiseFn from_expressions(Contour contour, const std::vector<ExpressionPiece>& pieces, JumpSet jumps) {
    std::vector<Piece> out;
    for (const auto& p : pieces) {
      auto fn = p.expression.compile({"t", "theta"});
      out.push_back({p.lo, p.hi, [fn](double theta, complex t) { return fn({t, complex(theta)}); }});
    }
    return PiecewiseFn(std::move(contour), std::move(out), std::move(jumps));
  }

  /// Single smooth piece on the whole contour, no jumps.
  static PiecewiseFn smooth(Contour contour, PieceFunction value) {
    return PiecewiseFn(std::move(contour), {{0.0, kTwoPi, std::move(value)}}, JumpSet{});
  }

  bool analytic() const { return !samples_.has_value(); }
  const JumpSet& jumps() const { return jumps_; }
  const Contour& contour() const { return *contour_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  /// Index of the piece (lo, hi] containing theta, reduced to (0, 2pi].
  std::size_t piece_index(double theta) const {
    const double c = closed_angle(theta);
    for (std::size_t p = 0; p < pieces_.size(); ++p)
      if (c <= pieces_[p].hi + kAngleTolerance) return p;
    return pieces_.size() - 1;
  }

  /// Evaluates piece p's formula at theta, regardless of whether theta lies inside it.
  complex eval_piece(std::size_t p, double theta) const {
    return pieces_.at(p).value(theta, contour_->point(theta));
  }

  /// Left-continuous value at theta.
  complex eval(double theta) const {
    if (samples_) return sample_value(theta);
    const double c = closed_angle(theta);
    return eval_piece(piece_index(c), c);
  }

  /// f(theta + 0). Equals eval() away from piece boundaries.
  complex right_limit(double theta) const {
    const double c = closed_angle(theta);
    if (samples_) {
      if (!jumps_.find(c)) return sample_value(c);
      const auto& a = samples_->angles;
      for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] > c + kAngleTolerance) return samples_->values[j];
      for (std::size_t j = 0; j < a.size(); ++j)  // past the reference point
        if (a[j] + kTwoPi > c + kAngleTolerance) return samples_->values[j];
      throw InsufficientDataError("no sample to the right of jump angle " + expr::detail::format_double(c));
    }
    const std::size_t p = piece_index(c);
    if (std::abs(c - pieces_[p].hi) <= kAngleTolerance) {
      if (p + 1 < pieces_.size()) return eval_piece(p + 1, c);
      return eval_piece(0, 0.0);  // closing point: continue into the first piece
    }
    return eval_piece(p, c);
  }

 private:
  struct Samples {
    std::vector<double> angles;
    std::vector<complex> values;
    std::vector<complex> jump_values;
  };

  PiecewiseFn(Contour contour, JumpSet jumps)
      : contour_(std::make_shared<Contour>(std::move(contour))), jumps_(std::move(jumps)) {}

  complex sample_value(double theta) const {
    if (auto r = jumps_.find(theta)) return samples_->jump_values[*r];
    for (std::size_t j = 0; j < samples_->angles.size(); ++j)
      if (angular_distance(theta, samples_->angles[j]) <= 1e-9) return samples_->values[j];
    throw InsufficientDataError("sampled function queried off its nodes at theta=" +
                                expr::detail::format_double(theta));
  }

  std::shared_ptr<const Contour> contour_;
  std::vector<Piece> pieces_;
  JumpSet jumps_;
  std::optional<Samples> samples_;
};

/// beta_r = f(theta_r + 0) - f(theta_r) for each jump angle.
inline std::vector<complex> jump_sizes(const PiecewiseFn& f) {
  std::vector<complex> beta(f.jumps().size());
  for (std::size_t r = 0; r < beta.size(); ++r) {
    const double d = f.jumps()[r];
    beta[r] = f.right_limit(d) - f.eval(d);
  }
  return beta;
}

/// f = f_C + f_H with f_H = sum beta_r H_r.
class Decomposition {
 public:
  Decomposition(PiecewiseFn f, std::vector<complex> beta) : f_(std::move(f)), beta_(std::move(beta)) {}

  const std::vector<complex>& jump_coeffs() const { return beta_; }
  const PiecewiseFn& function() const { return f_; }

  complex heaviside_part(double theta) const {
    complex sum(0.0);
    for (std::size_t r = 0; r < beta_.size(); ++r) sum += beta_[r] * Heaviside(f_.jumps()[r])(theta);
    return sum;
  }

  /// f_C; at a jump angle the right limit of f is used so that f_C stays continuous there.
  complex continuous_part(double theta) const {
    const complex fv = f_.jumps().find(theta) ? f_.right_limit(theta) : f_.eval(theta);
    return fv - heaviside_part(theta);
  }

 private:
  PiecewiseFn f_;
  std::vector<complex> beta_;
};

inline Decomposition decompose(const PiecewiseFn& f) { return Decomposition(f, jump_sizes(f)); }

struct ArcEstimate {
  double lo, hi;
  double sup;
  double quotient;
};

struct HoelderNormEstimate {
  double alpha;
  std::vector<ArcEstimate> per_arc;
  double total;
};

/// Sampled piecewise-Hoelder norm: on each arc between breakpoints, sup|g| plus the
/// largest |g(t)-g(s)|/|t-s|^alpha over sample pairs; total is the max over arcs.
inline HoelderNormEstimate ph_norm_estimate(const std::function<complex(double)>& g, const Contour& contour,
                                            const JumpSet& jumps, double alpha, std::size_t P) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("Hoelder exponent must lie in (0, 1]");
  if (P < 8) throw ConfigError("at least 8 samples per arc are required");
  HoelderNormEstimate est{alpha, {}, 0.0};
  const auto b = jumps.breakpoints();
  std::vector<complex> t(P), v(P);
  for (std::size_t a = 0; a + 1 < b.size(); ++a) {
    const double lo = b[a], hi = b[a + 1];
    if (!(hi - lo > kAngleTolerance)) throw ConfigError("empty arc between equal jump angles");
    const double margin = (hi - lo) / (10.0 * static_cast<double>(P));
    const double step = (hi - lo - 2.0 * margin) / static_cast<double>(P - 1);
    for (std::size_t i = 0; i < P; ++i) {
      const double theta = lo + margin + static_cast<double>(i) * step;
      t[i] = contour.point(theta);
      v[i] = g(theta);
    }
    ArcEstimate arc{lo, hi, 0.0, 0.0};
    for (std::size_t i = 0; i < P; ++i) {
      arc.sup = std::max(arc.sup, std::abs(v[i]));
      for (std::size_t j = i + 1; j < P; ++j) {
        const double dist = std::abs(t[i] - t[j]);
        if (dist > 0.0) arc.quotient = std::max(arc.quotient, std::abs(v[i] - v[j]) / std::pow(dist, alpha));
      }
    }
    est.total = std::max(est.total, arc.sup + arc.quotient);
    est.per_arc.push_back(arc);
  }
  return est;
}

}  // namespace fredholm
