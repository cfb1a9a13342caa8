#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qdwell/common.hpp"

namespace qdwell {

//! Monotone-safe cubic Hermite interpolant (Fritsch–Carlson slopes).
//! Overshoot-free on monotone data and C1 everywhere, so its analytic
//! derivative is usable wherever the interpolated function feeds an
//! energy-derivative formula.
class PchipInterpolator {
public:
  PchipInterpolator() = default;

  PchipInterpolator(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 4) throw InputError("pchip: need at least 4 points");
    if (y.size() != n) throw InputError("pchip: size mismatch");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x[i] > x[i - 1]))
        throw InputError("pchip: abscissae must be strictly increasing");
    x_.assign(x.begin(), x.end());
    y_.assign(y.begin(), y.end());
    slopes_ = fritsch_carlson_slopes(x_, y_);
  }

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

  double operator()(double x) const { return eval(x).first; }
  double derivative(double x) const { return eval(x).second; }

private:
  std::pair<double, double> eval(double x) const {
    if (x < x_.front() || x > x_.back())
      throw InputError("pchip: query outside table range");
    std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double y0 = y_[i], y1 = y_[i + 1];
    const double m0 = slopes_[i] * h, m1 = slopes_[i + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    const double val = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
    const double d00 = 6 * t2 - 6 * t;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = -d00;
    const double d11 = 3 * t2 - 2 * t;
    const double der = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
    return {val, der};
  }

  std::size_t locate(double x) const {
    std::size_t lo = 0, hi = x_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (x_[mid] <= x ? lo : hi) = mid;
    }
    return lo;
  }

  static std::vector<double> fritsch_carlson_slopes(
      const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), d(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      d[i] = (y[i + 1] - y[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        m[i] = 0.0;  // local extremum: flat tangent keeps it monotone
      } else {
        const double w1 = 2 * h[i] + h[i - 1];
        const double w2 = h[i] + 2 * h[i - 1];
        m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    m[0] = endpoint_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = endpoint_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
  }

  // Non-centered three-point estimate with the usual shape-preserving clamps.
  static double endpoint_slope(double h0, double h1, double d0, double d1) {
    double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0)
      m = 0.0;
    else if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0))
      m = 3.0 * d0;
    return m;
  }

  std::vector<double> x_, y_, slopes_;
};

}  // namespace qdwell
