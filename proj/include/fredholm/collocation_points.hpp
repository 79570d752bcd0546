#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fredholm/basis.hpp"
#include "fredholm/contour.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/piecewise.hpp"

namespace fredholm {

/// Offset: t^C_j = t^B_{j+1} for m = 2 and t^B_{j+2} for m = 3, 4. Nodes: t^C_j = t^B_j.
enum class CollocationRule { Offset, Nodes };

inline CollocationRule parse_collocation_rule(std::string_view s) {
  if (s == "offset") return CollocationRule::Offset;
  if (s == "nodes") return CollocationRule::Nodes;
  throw ConfigError("collocation rule must be 'offset' or 'nodes', got '" + std::string(s) + "'");
}

inline const char* to_string(CollocationRule r) { return r == CollocationRule::Offset ? "offset" : "nodes"; }

struct CollocationPoints {
  std::vector<double> angles;                        // n_B node rows followed by n_d jump rows
  std::vector<std::optional<std::size_t>> shifted;   // node rows moved off jump r
  std::size_t n_nodes = 0;

  std::size_t size() const { return angles.size(); }
  bool is_jump_row(std::size_t j) const { return j >= n_nodes; }
};

inline std::size_t collocation_offset(int order, CollocationRule rule) {
  if (rule == CollocationRule::Nodes) return 0;
  return order == 2 ? 1 : 2;
}

/// Node rows (cyclically offset, shifted to theta_d - eps2 where they hit a jump) and one row per jump.
inline CollocationPoints collocation_points(const NodeSet& nodes, int order, const JumpSet& jumps, double eps2,
                                            CollocationRule rule = CollocationRule::Offset) {
  const std::size_t n_B = nodes.size();
  const std::size_t off = collocation_offset(order, rule);
  CollocationPoints pts;
  pts.n_nodes = n_B;
  for (std::size_t j = 0; j < n_B; ++j) {
    double a = nodes.angles[(j + off) % n_B];
    std::optional<std::size_t> hit = jumps.find(a);
    if (hit) {
      a = jumps[*hit] - eps2;
      for (std::size_t r = 0; r < jumps.size(); ++r)
        if (r != *hit && jumps[r] >= a - kAngleTolerance && jumps[r] < jumps[*hit])
          throw ConfigError("shifted collocation point collides with a jump angle; choose a different eps2");
      if (a <= 0.0) throw ConfigError("eps2 moves a collocation point past the reference point");
    }
    pts.angles.push_back(a);
    pts.shifted.push_back(hit);
  }
  for (double d : jumps.angles()) {
    pts.angles.push_back(d);
    pts.shifted.push_back(std::nullopt);
  }
  return pts;
}

/// Right-hand side at the collocation points. Jump rows take the right limit f(theta_d + 0),
/// matching the right-continuous Heaviside; a shifted node row of sampled data uses f(theta_d).
inline std::vector<complex> sample_at_collocation(const PiecewiseFn& f, const CollocationPoints& pts,
                                                  const JumpSet& jumps) {
  std::vector<complex> v(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (pts.is_jump_row(j)) {
      v[j] = f.right_limit(pts.angles[j]);
    } else if (pts.shifted[j] && !f.analytic()) {
      v[j] = f.eval(jumps[*pts.shifted[j]]);
    } else {
      v[j] = f.eval(pts.angles[j]);
    }
  }
  return v;
}

}  // namespace fredholm
