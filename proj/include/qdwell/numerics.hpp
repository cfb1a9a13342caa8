#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qdwell/common.hpp"

namespace qdwell {

//! Five-point central first derivative of f at x with step h.
template <typename F>
auto five_point_derivative(F&& f, double x, double h)
    -> decltype(f(x)) {
  return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) /
         (12.0 * h);
}

// Derivative of the degree-4 interpolating polynomial through five
// arbitrary nodes, evaluated at node `at` (0..4). Handles non-uniform
// spacing, which covers log grids and one-sided edge stencils alike.
template <typename T>
T lagrange5_derivative(const std::array<double, 5>& x,
                       const std::array<T, 5>& y, int at) {
  T acc{};
  for (int i = 0; i < 5; ++i) {
    double w;
    if (i == at) {
      w = 0.0;
      for (int m = 0; m < 5; ++m)
        if (m != at) w += 1.0 / (x[at] - x[m]);
    } else {
      double num = 1.0, den = 1.0;
      for (int m = 0; m < 5; ++m) {
        if (m == i) continue;
        if (m != at) num *= (x[at] - x[m]);
        den *= (x[i] - x[m]);
      }
      w = num / den;
    }
    acc += w * y[i];
  }
  return acc;
}

// Differentiate a sampled series with five-point stencils; the window is
// clamped at the edges so every point gets a full five-node fit.
template <typename T>
std::vector<T> derivative_series(std::span<const double> x,
                                 std::span<const T> y) {
  const std::size_t n = x.size();
  if (n < 5) throw InputError("derivative_series: need at least 5 samples");
  if (y.size() != n)
    throw InputError("derivative_series: size mismatch");
  std::vector<T> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t lo = j >= 2 ? j - 2 : 0;
    if (lo + 5 > n) lo = n - 5;
    std::array<double, 5> xs;
    std::array<T, 5> ys;
    for (int m = 0; m < 5; ++m) {
      xs[m] = x[lo + m];
      ys[m] = y[lo + m];
    }
    out[j] = lagrange5_derivative(xs, ys, static_cast<int>(j - lo));
  }
  return out;
}

namespace detail {

template <typename F>
double adaptive_simpson_rec(F& f, double a, double m, double b, double fa,
                            double fm, double fb, double whole, double tol,
                            int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0)
    throw NumericalError("adaptive quadrature did not converge");
  return adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol,
                              depth - 1);
}

}  // namespace detail

//! Adaptive Simpson quadrature of f over [a,b] to absolute tolerance.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol,
                        int max_depth = 40) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, m, b, fa, fm, fb, whole, abs_tol,
                                      max_depth);
}

//! In-place minimal-jump unwrapping: each value is shifted by multiples of
//! `period` to minimise the jump from its predecessor.
inline void unwrap_inplace(std::span<double> values, double period) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double shift =
        std::round((values[i - 1] - values[i]) / period) * period;
    values[i] += shift;
  }
}

//! Distance between two angles identified modulo `period`.
inline double circular_distance(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

struct RichardsonResult {
  double limit = 0.0;
  double stage1_a = 0.0;  // extrapolant from the two coarser scales
  double stage1_b = 0.0;  // extrapolant from the two finer scales
  bool converged = false;
};

// Two-stage Richardson extrapolation of f(k) -> f(0) from samples at
// k, k/2, k/4, assuming the leading error is O(k^2). `floor` is an
// absolute tolerance added to the 1% agreement requirement so that
// quantities converging to zero are not rejected for round-off noise.
inline RichardsonResult richardson_k2_limit(double f_k, double f_k2,
                                            double f_k4,
                                            double floor = 0.0) {
  RichardsonResult r;
  r.stage1_a = (4.0 * f_k2 - f_k) / 3.0;
  r.stage1_b = (4.0 * f_k4 - f_k2) / 3.0;
  r.limit = (16.0 * r.stage1_b - r.stage1_a) / 15.0;
  const double tol =
      0.01 * std::max(std::abs(r.stage1_a), std::abs(r.stage1_b)) + floor;
  r.converged = std::abs(r.stage1_b - r.stage1_a) <= tol;
  return r;
}

// Gaussian elimination with partial pivoting for the small dense systems
// used by the Lorentzian fitter. Returns false if the matrix is singular.
inline bool solve_dense(std::vector<double>& a, std::vector<double>& b,
                        int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
  return true;
}

}  // namespace qdwell
