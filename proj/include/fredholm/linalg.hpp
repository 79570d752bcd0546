#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "fredholm/errors.hpp"

namespace fredholm {

using complex = std::complex<double>;

/// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<complex> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const complex> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<complex> multiply(std::span<const complex> x) const {
    std::vector<complex> y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      complex s(0.0);
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Maximum absolute column sum.
  double norm1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<complex> data_;
};

inline double norm_inf(std::span<const complex> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm1(std::span<const complex> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::abs(x);
  return s;
}

/// PA = LU with partial pivoting; L has unit diagonal and is stored below U.
class LuFactorization {
 public:
  /// Throws SingularSystemError when a pivot falls below pivot_tolerance * max|A_ij|.
  explicit LuFactorization(ComplexMatrix a, double pivot_tolerance = 1e-14)
      : lu_(std::move(a)), perm_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    if (n != lu_.cols()) throw ConfigError("LU requires a square matrix");
    norm1_ = lu_.norm1();
    const double scale = lu_.max_abs();
    if (scale == 0.0 && n > 0) throw SingularSystemError("zero matrix", 0);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    min_pivot_ratio_ = n ? INFINITY : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i)
        if (double v = std::abs(lu_(i, k)); v > best) best = v, p = i;
      min_pivot_ratio_ = std::min(min_pivot_ratio_, best / scale);
      if (best < pivot_tolerance * scale) throw SingularSystemError("pivot below singularity threshold", k);
      if (p != k) {
        std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
        std::swap(perm_[k], perm_[p]);
      }
      const complex pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const complex l = lu_(i, k) / pivot;
        lu_(i, k) = l;
        if (l == complex(0.0)) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }
  double min_pivot_ratio() const { return min_pivot_ratio_; }

  /// Solves A x = b.
  std::vector<complex> solve(std::span<const complex> b) const {
    const std::size_t n = size();
    std::vector<complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

  /// Solves A^H x = b.
  std::vector<complex> solve_adjoint(std::span<const complex> b) const {
    const std::size_t n = size();
    std::vector<complex> y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {  // U^H y = b
      for (std::size_t j = 0; j < i; ++j) y[i] -= std::conj(lu_(j, i)) * y[j];
      y[i] /= std::conj(lu_(i, i));
    }
    for (std::size_t i = n; i-- > 0;)  // L^H z = y
      for (std::size_t j = i + 1; j < n; ++j) y[i] -= std::conj(lu_(j, i)) * y[j];
    std::vector<complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = y[i];
    return x;
  }

  /// ||A||_1 * est(||A^{-1}||_1), with the inverse norm estimated by Hager-Higham probing.
  double condition_estimate_1norm() const { return norm1_ * inverse_norm1_estimate(); }

  double inverse_norm1_estimate() const {
    const std::size_t n = size();
    if (n == 0) return 0.0;
    std::vector<complex> x(n, complex(1.0 / static_cast<double>(n)));
    double est = 0.0;
    std::size_t last = n;
    for (int iter = 0; iter < 5; ++iter) {
      const auto y = solve(x);
      const double new_est = norm1(y);
      if (iter > 0 && new_est <= est) break;
      est = new_est;
      std::vector<complex> xi(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(y[i]);
        xi[i] = a > 0.0 ? y[i] / a : complex(1.0);
      }
      const auto z = solve_adjoint(xi);
      std::size_t j = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (std::abs(z[i]) > std::abs(z[j])) j = i;
      complex ztx(0.0);
      for (std::size_t i = 0; i < n; ++i) ztx += std::conj(z[i]) * x[i];
      if (iter > 0 && (std::abs(z[j]) <= ztx.real() || j == last)) break;
      last = j;
      std::fill(x.begin(), x.end(), complex(0.0));
      x[j] = 1.0;
    }
    // Alternating probe guards against the estimator stalling on structured matrices.
    std::vector<complex> alt(n);
    for (std::size_t i = 0; i < n; ++i)
      alt[i] = (i % 2 ? -1.0 : 1.0) * (1.0 + (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0));
    const double alt_est = 2.0 * norm1(solve(alt)) / (3.0 * static_cast<double>(n));
    return std::max(est, alt_est);
  }

 private:
  ComplexMatrix lu_;
  std::vector<std::size_t> perm_;
  double norm1_ = 0.0;
  double min_pivot_ratio_ = 0.0;
};

/// ||A x - b||_inf.
inline double residual_inf(const ComplexMatrix& a, std::span<const complex> x, std::span<const complex> b) {
  const auto ax = a.multiply(x);
  double r = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) r = std::max(r, std::abs(ax[i] - b[i]));
  return r;
}

}  // namespace fredholm
