#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "fredholm/errors.hpp"
#include "fredholm/expr.hpp"

namespace fredholm {

using complex = std::complex<double>;

struct QuadratureConfig {
  std::size_t N = 200;         // subintervals per integration segment
  std::size_t oracle_N = 4000; // fine count for self-checks and manufactured data

  void validate() const {
    if (N < 2) throw ConfigError("quad_N must be at least 2");
    if (oracle_N < 4 * N) throw ConfigError("oracle_N must be at least 4*quad_N");
  }
};

/// h * (0.5*(v_0 + v_N) + sum_{j=1}^{N-1} v_j) for already-sampled integrand values.
inline complex trapezoid_sum(std::span<const complex> values, double h) {
  complex interior(0.0);
  for (std::size_t j = 1; j + 1 < values.size(); ++j) interior += values[j];
  return h * (0.5 * (values.front() + values.back()) + interior);
}

/// Generalized trapezoidal rule on [a, b] with N equal subintervals for complex integrands.
template <class F>
complex trapezoid(F&& g, double a, double b, std::size_t N) {
  if (!(a < b)) throw ConfigError("trapezoid requires a < b");
  if (N < 1) throw ConfigError("trapezoid requires N >= 1");
  const double h = (b - a) / static_cast<double>(N);
  std::vector<complex> values(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    const double theta = j == N ? b : a + static_cast<double>(j) * h;
    try {
      values[j] = g(theta);
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string(e.what()) + " (quadrature node theta=" +
                            expr::detail::format_double(theta) + ")");
    }
    if (!std::isfinite(values[j].real()) || !std::isfinite(values[j].imag()))
      throw EvaluationError("non-finite integrand at quadrature node theta=" + expr::detail::format_double(theta));
  }
  return trapezoid_sum(values, h);
}

}  // namespace fredholm
