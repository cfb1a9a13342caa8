#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <variant>
#include <vector>

#include "qdwell/common.hpp"
#include "qdwell/interp.hpp"
#include "qdwell/kinematics.hpp"

namespace qdwell {

//! Complex scattering length a = a_R + i*a_I in the convention
//! f(0) = +a, delta ~ +k*a_R, t(0) = -2*pi*a/mu. Sources using the
//! opposite-sign convention must be flipped on ingestion.
struct ComplexScatteringLength {
  double re = 0.0;
  double im = 0.0;
  Complex value() const { return {re, im}; }
  //! a_I < 0 would describe gain rather than absorption; legal but suspect.
  bool absorptive_convention_ok() const { return im >= 0.0; }
};

//! t-matrix and derived amplitudes at one energy. S = 1 - i*mu*k*t/pi,
//! R_amp = -S, eta = |S| = exp(-2*delta_I). When `pole` is set the point
//! sits on a flagged pole of the underlying model and the other fields
//! are not meaningful.
struct AmplitudePoint {
  double E = 0.0;
  Complex t{};
  Complex dt_dE{};
  Complex delta{};  // delta_R + i*delta_I, radians
  Complex S{};
  Complex R_amp{};
  double eta = 0.0;
  bool pole = false;
};

struct BreitWignerParams {
  double e_res = 0.0;
  double gamma = 0.0;

  void validate() const {
    if (!(e_res > 0.0) || !(gamma > 0.0))
      throw InputError("breit_wigner: E_r and Gamma must be positive");
  }
};

namespace detail {

inline AmplitudePoint finish_point(double E, Complex t, Complex dt,
                                   const ChannelConfig& ch) {
  const Wavenumber kin = wavenumber(E, ch);
  AmplitudePoint p;
  p.E = E;
  p.t = t;
  p.dt_dE = dt;
  p.S = 1.0 - Complex(0, 1) * ch.reduced_mass * kin.k * t / constants::pi;
  p.R_amp = -p.S;
  p.eta = std::abs(p.S);
  p.delta = Complex(0.5 * std::arg(p.S), -0.5 * std::log(p.eta));
  return p;
}

inline AmplitudePoint flagged_pole(double E) {
  AmplitudePoint p;
  p.E = E;
  p.pole = true;
  return p;
}

}  // namespace detail

//! Assemble an AmplitudePoint from externally supplied t and dt/dE, e.g.
//! from a radial phase-shift solve.
inline AmplitudePoint amplitude_from_t(double E, Complex t, Complex dt_dE,
                                       const ChannelConfig& ch) {
  return detail::finish_point(E, t, dt_dE, ch);
}

//! Zero-range (scattering-length-only) model: f(k) = 1/(1/a - i k).
inline AmplitudePoint t_zero_range(double E, const ComplexScatteringLength& a,
                                   const ChannelConfig& ch) {
  if (a.value() == Complex(0.0, 0.0))
    throw InputError("trivial interaction: scattering length is zero");
  const Wavenumber kin = wavenumber(E, ch);
  const double mu = ch.reduced_mass;
  const Complex denom = 1.0 / a.value() - Complex(0, 1) * kin.k;
  if (std::abs(denom) < 1e-14) return detail::flagged_pole(E);
  const Complex f = 1.0 / denom;
  const Complex t = -(2.0 * constants::pi / mu) * f;
  // df/dk = i f^2
  const Complex dt = -(2.0 * constants::pi / mu) * Complex(0, 1) * f * f *
                     kin.dk_dE;
  return detail::finish_point(E, t, dt, ch);
}

//! Effective-range model: f(k) = 1/(1/a - (r_e/2) k^2 - i k).
inline AmplitudePoint t_effective_range(double E,
                                        const ComplexScatteringLength& a,
                                        double effective_range,
                                        const ChannelConfig& ch) {
  if (a.value() == Complex(0.0, 0.0))
    throw InputError("trivial interaction: scattering length is zero");
  const Wavenumber kin = wavenumber(E, ch);
  const double mu = ch.reduced_mass;
  const Complex k = kin.k;
  const Complex denom =
      1.0 / a.value() - 0.5 * effective_range * k * k - Complex(0, 1) * k;
  if (std::abs(denom) < 1e-14) return detail::flagged_pole(E);
  const Complex f = 1.0 / denom;
  // d(1/f)/dk = -r_e k - i
  const Complex dt = -(2.0 * constants::pi / mu) * f * f *
                     (effective_range * k + Complex(0, 1)) * kin.dk_dE;
  const Complex t = -(2.0 * constants::pi / mu) * f;
  return detail::finish_point(E, t, dt, ch);
}

//! Unitary Breit-Wigner resonance: f = (1/k) (Gamma/2) / ((E_r - E) - i Gamma/2).
//! Positive energies only; this form is not a threshold parametrisation.
inline AmplitudePoint t_breit_wigner(double E, const BreitWignerParams& p,
                                     const ChannelConfig& ch) {
  p.validate();
  if (!(E > 0.0))
    throw InputError("breit_wigner model requires E > 0");
  const Wavenumber kin = wavenumber(E, ch);
  const double mu = ch.reduced_mass;
  const double k = kin.k.real();
  const double dk = kin.dk_dE.real();
  const Complex D = Complex(p.e_res - E, -0.5 * p.gamma);
  const double half_gamma = 0.5 * p.gamma;
  const Complex f = half_gamma / (k * D);
  const Complex df = half_gamma * (-dk / (k * k) / D + 1.0 / (k * D * D));
  return detail::finish_point(E, -(2.0 * constants::pi / mu) * f,
                              -(2.0 * constants::pi / mu) * df, ch);
}

//! Tabulated t-matrix: independent monotone cubic interpolation of t_R and
//! t_I with the interpolant's own derivative. No extrapolation and no
//! negative-energy continuation (continuing sampled data is ill-posed).
class TabulatedTMatrix {
public:
  TabulatedTMatrix() = default;

  TabulatedTMatrix(std::span<const double> E, std::span<const double> t_re,
                   std::span<const double> t_im)
      : re_(E, t_re), im_(E, t_im) {}

  double e_min() const { return re_.x_min(); }
  double e_max() const { return re_.x_max(); }

  AmplitudePoint at(double E, const ChannelConfig& ch) const {
    if (E < e_min() || E > e_max())
      throw InputError("tabulated t-matrix: energy outside table range");
    const Complex t(re_(E), im_(E));
    const Complex dt(re_.derivative(E), im_.derivative(E));
    return detail::finish_point(E, t, dt, ch);
  }

private:
  PchipInterpolator re_, im_;
};

inline AmplitudePoint t_tabulated(double E, const TabulatedTMatrix& table,
                                  const ChannelConfig& ch) {
  return table.at(E, ch);
}

//! Low-energy quantum-reflection reference amplitude exp(i(pi - 2 a k)):
//! |R| -> 1 and the reflection phase approaches pi linearly in k.
inline Complex reflection_asymptotics(const ComplexScatteringLength& a,
                                      double k) {
  return std::exp(Complex(0, 1) *
                  (constants::pi - 2.0 * a.value() * k));
}

// --- model handle used by spectra and the CLI ---

struct ZeroRangeModel {
  ComplexScatteringLength a;
};
struct EffectiveRangeModel {
  ComplexScatteringLength a;
  double effective_range = 0.0;
};
struct BreitWignerModel {
  BreitWignerParams params;
};
struct TabulatedModel {
  TabulatedTMatrix table;
};

using TMatrixModel = std::variant<ZeroRangeModel, EffectiveRangeModel,
                                  BreitWignerModel, TabulatedModel>;

inline AmplitudePoint evaluate(const TMatrixModel& model, double E,
                               const ChannelConfig& ch) {
  return std::visit(
      [&](const auto& m) -> AmplitudePoint {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ZeroRangeModel>)
          return t_zero_range(E, m.a, ch);
        else if constexpr (std::is_same_v<M, EffectiveRangeModel>)
          return t_effective_range(E, m.a, m.effective_range, ch);
        else if constexpr (std::is_same_v<M, BreitWignerModel>)
          return t_breit_wigner(E, m.params, ch);
        else
          return t_tabulated(E, m.table, ch);
      },
      model);
}

//! Closed-form models continue to E < 0 by k -> i*kappa; sampled data does
//! not.
inline bool supports_negative_energy(const TMatrixModel& model) {
  return !std::holds_alternative<BreitWignerModel>(model) &&
         !std::holds_alternative<TabulatedModel>(model);
}

}  // namespace qdwell
