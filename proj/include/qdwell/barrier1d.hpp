#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qdwell/common.hpp"
#include "qdwell/numerics.hpp"

namespace qdwell {

//! Rectangular barrier on [0, L]. V0 may be negative (a well) or complex
//! with negative imaginary part (absorption).
struct BarrierSpec {
  Complex v0{};
  double length = 0.0;
  double mass = 1.0;

  void validate() const {
    if (!(length > 0.0)) throw InputError("barrier: length must be positive");
    if (!(mass > 0.0)) throw InputError("barrier: mass must be positive");
  }
};

//! Stationary solution summary at one energy. Amplitudes are referenced to
//! the barrier faces: incident e^{ikx} + R e^{-ikx} for x < 0 and
//! T e^{ik(x-L)} for x > L. That is the convention under which
//! tau_phase = tau_dwell + tau_si closes for real V0.
struct BarrierSolution {
  double E = 0.0;
  Complex R_amp{};
  Complex T_amp{};
  double tau_dwell = 0.0;
  double tau_phase = 0.0;
  double tau_si = 0.0;
  double free_transit = 0.0;        // tau0 = m L/(hbar k)
  double unitarity_deficit = 0.0;   // 1 - |R|^2 - |T|^2
  double identity_residual = 0.0;   // tau_phase - tau_dwell - tau_si
};

namespace barrier_detail {

inline void check_energy(double E, const BarrierSpec& b) {
  b.validate();
  if (!(E > 0.0)) throw InputError("barrier: E must be positive");
  if (std::abs(E - b.v0.real()) <= 1e-6 * std::abs(b.v0))
    throw InputError("barrier-top point excluded");
}

struct Amplitudes {
  Complex R, T, q;
  double k;
};

// sinh <-> sin continuation happens through the principal complex sqrt;
// for complex V0 the branch cut is never touched.
inline Amplitudes solve(double E, const BarrierSpec& b) {
  check_energy(E, b);
  const double k = std::sqrt(2.0 * b.mass * E);
  const Complex q = std::sqrt(2.0 * b.mass * (Complex(E) - b.v0));
  const double L = b.length;
  if (std::abs(q.imag()) * L > 650.0)
    throw NumericalError("barrier: opaque limit overflows");
  const Complex c = std::cos(q * L), s = std::sin(q * L);
  const Complex den = 2.0 * k * q * c - Complex(0, 1) * (k * k + q * q) * s;
  Amplitudes a;
  a.k = k;
  a.q = q;
  a.T = 2.0 * k * q / den;
  a.R = Complex(0, 1) * (q * q - k * k) * s / den;
  return a;
}

}  // namespace barrier_detail

//! Face-referenced reflection and transmission amplitudes.
inline std::pair<Complex, Complex> rt_amplitudes(double E,
                                                 const BarrierSpec& b) {
  const auto a = barrier_detail::solve(E, b);
  return {a.R, a.T};
}

//! Interior wave psi(x) = A e^{iqx} + B e^{-iqx} on [0, L].
struct BarrierWave {
  Complex A, B, q;
  double k;
  Complex psi(double x) const {
    return A * std::exp(Complex(0, 1) * q * x) +
           B * std::exp(-Complex(0, 1) * q * x);
  }
};

inline BarrierWave interior_wave(double E, const BarrierSpec& b) {
  const auto a = barrier_detail::solve(E, b);
  const Complex phase = std::exp(-Complex(0, 1) * a.q * b.length);
  BarrierWave w;
  w.k = a.k;
  w.q = a.q;
  w.A = a.T * (a.q + a.k) * phase / (2.0 * a.q);
  w.B = a.T * (a.q - a.k) / phase / (2.0 * a.q);
  return w;
}

//! Dwell time: time spent in [0, L] regardless of the eventual channel,
//! (1/j_inc) * int_0^L |psi|^2 dx with j_inc = hbar k/m, by adaptive
//! quadrature to absolute tolerance 1e-12 * L * max|psi|^2.
inline double dwell_time(double E, const BarrierSpec& b) {
  const BarrierWave w = interior_wave(E, b);
  double max_psi2 = 0.0;
  for (int i = 0; i <= 64; ++i)
    max_psi2 = std::max(max_psi2,
                        std::norm(w.psi(b.length * i / 64.0)));
  const double tol = 1e-12 * b.length * std::max(max_psi2, 1e-300);
  const double integral = adaptive_simpson(
      [&](double x) { return std::norm(w.psi(x)); }, 0.0, b.length, tol);
  return (b.mass / w.k) * integral;
}

//! Weighted phase time hbar [|T|^2 d(arg T)/dE + |R|^2 d(arg R)/dE] from a
//! five-point stencil on unwrapped face-referenced phases. The step is
//! refined whenever a phase jump between stencil nodes exceeds pi/2, which
//! happens near transmission resonances where arg R moves quickly.
inline double phase_time(double E, const BarrierSpec& b) {
  const auto center = barrier_detail::solve(E, b);
  const double wT = std::norm(center.T);
  const double wR = std::norm(center.R);
  // An exact reflection zero carries zero weight; its phase is undefined.
  const bool use_R = std::abs(center.R) >= 1e-12;

  // Phases vary on the scale of E itself near threshold; the step follows
  // it down so truncation error stays far below the identity tolerance.
  double h = 8e-4 * std::min(E, std::max(1.0, 0.2 * E));
  const double band = 1e-6 * std::abs(b.v0);
  const double dist = std::abs(E - b.v0.real()) - band;
  h = std::min({h, 0.2 * E, 0.4 * std::max(dist, 0.0)});
  if (!(h > 0.0))
    throw NumericalError("phase_time: no room for stencil around E");

  for (int attempt = 0; attempt < 8; ++attempt) {
    std::array<double, 5> argT{}, argR{};
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
      const auto a = barrier_detail::solve(E + (i - 2) * h, b);
      argT[i] = std::arg(a.T);
      argR[i] = std::arg(a.R);
    }
    unwrap_inplace(argT, 2.0 * constants::pi);
    unwrap_inplace(argR, 2.0 * constants::pi);
    for (int i = 1; i < 5 && ok; ++i) {
      if (std::abs(argT[i] - argT[i - 1]) > 0.5 * constants::pi) ok = false;
      if (use_R && std::abs(argR[i] - argR[i - 1]) > 0.5 * constants::pi)
        ok = false;
    }
    if (!ok) {
      h *= 0.25;
      continue;
    }
    const double dT =
        (argT[0] - 8 * argT[1] + 8 * argT[3] - argT[4]) / (12.0 * h);
    const double dR =
        use_R ? (argR[0] - 8 * argR[1] + 8 * argR[3] - argR[4]) / (12.0 * h)
              : 0.0;
    return wT * dT + wR * dR;
  }
  throw NumericalError("phase_time: phase unwrap ambiguity persists");
}

//! Self-interference term -hbar Im(R)/k * dk/dE with dk/dE = m/(hbar^2 k).
inline double self_interference_1d(double E, const BarrierSpec& b) {
  const auto a = barrier_detail::solve(E, b);
  return -a.R.imag() * b.mass / (a.k * a.k);
}

inline BarrierSolution solve_barrier(double E, const BarrierSpec& b) {
  BarrierSolution s;
  s.E = E;
  const auto a = barrier_detail::solve(E, b);
  s.R_amp = a.R;
  s.T_amp = a.T;
  s.tau_dwell = dwell_time(E, b);
  s.tau_phase = phase_time(E, b);
  s.tau_si = self_interference_1d(E, b);
  s.free_transit = b.mass * b.length / a.k;
  s.unitarity_deficit = 1.0 - std::norm(a.R) - std::norm(a.T);
  s.identity_residual = s.tau_phase - s.tau_dwell - s.tau_si;
  return s;
}

inline std::vector<BarrierSolution> scan(const BarrierSpec& b,
                                         std::span<const double> grid) {
  b.validate();
  std::vector<BarrierSolution> out;
  out.reserve(grid.size());
  for (double e : grid) out.push_back(solve_barrier(e, b));
  return out;
}

}  // namespace qdwell
