#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qdwell/amplitudes.hpp"
#include "qdwell/common.hpp"
#include "qdwell/kinematics.hpp"
#include "qdwell/numerics.hpp"

namespace qdwell {

//! Delay quantities at one energy, all in hbar/energy-unit.
//! tau_dwell = tau_phase - tau_si holds by construction; A_factor is the
//! squared S-matrix modulus entering the phase-delay denominator (exactly
//! 1 for unitary S); dos_diff is the (2l+1)-weighted single-wave
//! Beth-Uhlenbeck density-of-states difference tau_phase*(2l+1)/(2*pi*hbar).
struct DelayPoint {
  double E = 0.0;
  double tau_phase = 0.0;
  double tau_si = 0.0;
  double tau_dwell = 0.0;
  double A_factor = 0.0;
  double dos_diff = 0.0;
};

struct DelaySpectrum {
  ChannelConfig channel;
  std::vector<DelayPoint> points;
  std::vector<double> flagged_poles;
};

namespace detail {

inline void check_same_energy(const AmplitudePoint& ap,
                              const Wavenumber& kin,
                              const ChannelConfig& ch) {
  const double e_from_k =
      (kin.k * kin.k).real() / (2.0 * ch.reduced_mass);
  if (std::abs(e_from_k - ap.E) >
      1e-9 * std::max(std::abs(ap.E), 1e-300))
    throw InputError("amplitude and wavenumber are at different energies");
}

}  // namespace detail

//! Phase time delay (Wigner-Eisenbud delay). For E > 0 this is the
//! closed-form t-matrix expression
//!   (2/A) [ -(mu/2pi) k t_R' - (mu^2 k^2/2pi^2)(t_I t_R' - t_R t_I')
//!           - (mu/2pi) t_R k' ],
//!   A = 1 + 2 mu k t_I/pi + mu^2 k^2 (t_R^2 + t_I^2)/pi^2,
//! which equals Re[-i S^{-1} dS/dE]. For E < 0 the S-matrix form is
//! continued analytically with k = i*kappa.
inline double phase_time_delay(const AmplitudePoint& ap,
                               const Wavenumber& kin,
                               const ChannelConfig& ch) {
  if (ap.pole) throw NumericalError("phase_time_delay: pole-flagged point");
  if (ap.E == 0.0)
    throw InputError("threshold point; use limit operations");
  detail::check_same_energy(ap, kin, ch);
  const double mu = ch.reduced_mass;
  if (ap.E > 0.0) {
    const double k = kin.k.real();
    const double dk = kin.dk_dE.real();
    const double tr = ap.t.real(), ti = ap.t.imag();
    const double trp = ap.dt_dE.real(), tip = ap.dt_dE.imag();
    const double pi = constants::pi;
    const double A = 1.0 + 2.0 * mu * k * ti / pi +
                     mu * mu * k * k * (tr * tr + ti * ti) / (pi * pi);
    if (A < 1e-14) throw NumericalError("S-matrix zero on grid");
    const double bracket = -(mu / (2 * pi)) * k * trp -
                           (mu * mu * k * k / (2 * pi * pi)) *
                               (ti * trp - tr * tip) -
                           (mu / (2 * pi)) * tr * dk;
    return 2.0 * bracket / A;
  }
  // continued S-matrix route
  const Complex S = ap.S;
  const double A = std::norm(S);
  if (A < 1e-14) throw NumericalError("S-matrix zero on grid");
  const Complex dS = -Complex(0, 1) * (mu / constants::pi) *
                     (ap.t * kin.dk_dE + kin.k * ap.dt_dE);
  return (-Complex(0, 1) * dS / S).real();
}

//! Self-interference delay -hbar*Im(R)/k * dk/dE = -hbar*mu*t_R/pi * dk/dE.
//! One complex code path covers both energy signs: Re[k t] plays the role
//! of k*t_R, and at E < 0 the continued expression reduces to
//! -mu^2 t_I/(pi*kappa), i.e. t_R is traded for t_I below threshold.
inline double self_interference_delay(const AmplitudePoint& ap,
                                      const Wavenumber& kin,
                                      const ChannelConfig& ch) {
  if (ap.pole)
    throw NumericalError("self_interference_delay: pole-flagged point");
  if (ap.E == 0.0)
    throw InputError("threshold point; use limit operations");
  detail::check_same_energy(ap, kin, ch);
  const double mu = ch.reduced_mass;
  const double im_R = (kin.k * ap.t).real() * mu / constants::pi;
  const Complex value = -im_R * (kin.dk_dE / kin.k);
  if (std::abs(value.imag()) > 1e-10 * std::abs(value) &&
      std::abs(value) > 0.0)
    throw NumericalError("continuation inconsistency");
  return value.real();
}

//! Dwell time delay, free of the s-wave 1/k threshold singularity that the
//! phase delay carries.
inline double dwell_time_delay(const AmplitudePoint& ap,
                               const Wavenumber& kin,
                               const ChannelConfig& ch) {
  return phase_time_delay(ap, kin, ch) -
         self_interference_delay(ap, kin, ch);
}

//! Sampled phase shifts of one partial wave on a common energy grid.
struct PhaseShiftSeries {
  int l = 0;
  std::vector<double> E;
  std::vector<Complex> delta;
};

//! Beth-Uhlenbeck density-of-states difference
//!   g - g0 = sum_l (2l+1)/pi * d(delta_l)/dE
//! evaluated pointwise with five-point stencils on the sample grid.
inline std::vector<double> dos_difference(
    std::span<const PhaseShiftSeries> series) {
  if (series.empty()) throw InputError("dos_difference: no series");
  const auto& grid = series.front().E;
  if (grid.size() < 5)
    throw InputError("dos_difference: need at least 5 samples");
  std::vector<double> out(grid.size(), 0.0);
  for (const auto& s : series) {
    if (s.E != grid)
      throw InputError("dos_difference: series must share one energy grid");
    if (s.delta.size() != s.E.size())
      throw InputError("dos_difference: size mismatch");
    std::vector<double> delta_r(s.delta.size());
    for (std::size_t i = 0; i < s.delta.size(); ++i)
      delta_r[i] = s.delta[i].real();
    const auto d = derivative_series<double>(s.E, delta_r);
    const double weight = (2.0 * s.l + 1.0) / constants::pi;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weight * d[i];
  }
  return out;
}

//! Delay spectrum of a model over an energy grid. Pole-flagged points are
//! excluded and recorded; output order follows the grid, so results are
//! deterministic no matter how evaluation is scheduled.
inline DelaySpectrum spectrum(const TMatrixModel& model,
                              std::span<const double> grid,
                              const ChannelConfig& ch) {
  if (grid.empty()) throw InputError("spectrum: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw InputError("spectrum: grid must be strictly increasing");
  for (double e : grid) {
    if (e == 0.0) throw InputError("spectrum: grid contains E = 0");
    if (e < 0.0 && !supports_negative_energy(model))
      throw InputError("spectrum: model does not continue to E < 0");
  }
  DelaySpectrum out;
  out.channel = ch;
  out.points.reserve(grid.size());
  const double weight = 2.0 * ch.partial_wave + 1.0;
  for (double e : grid) {
    try {
      const AmplitudePoint ap = evaluate(model, e, ch);
      if (ap.pole) {
        out.flagged_poles.push_back(e);
        continue;
      }
      const Wavenumber kin = wavenumber(e, ch);
      DelayPoint p;
      p.E = e;
      p.tau_phase = phase_time_delay(ap, kin, ch);
      p.tau_si = self_interference_delay(ap, kin, ch);
      p.tau_dwell = p.tau_phase - p.tau_si;
      p.A_factor = std::norm(ap.S);
      p.dos_diff = weight * p.tau_phase / (2.0 * constants::pi);
      out.points.push_back(p);
    } catch (const NumericalError& err) {
      throw NumericalError(std::string(err.what()) + " at E = " +
                           std::to_string(e));
    }
  }
  if (out.points.empty())
    throw InputError("spectrum: no usable grid points");
  return out;
}

struct ThresholdLimits {
  double k_tau_phase_limit = 0.0;  // lim k->0+ of k * tau_phase -> 2 a_R mu
  double tau_dwell_limit = 0.0;    // lim k->0+ of tau_dwell
};

//! Richardson-extrapolated threshold limits over k in {1e-3, 5e-4, 2.5e-4}
//! (internal units; fm^-1 for mev_fm channels). The dwell-delay tolerance
//! carries an absolute floor tied to the diverging phase delay, since a
//! cancelling model leaves only round-off in tau_dwell.
inline ThresholdLimits threshold_limits(const TMatrixModel& model,
                                        const ChannelConfig& ch) {
  std::array<double, 3> ks = {1e-3, 5e-4, 2.5e-4};
  if (ch.units == UnitSystem::mev_fm)
    for (double& k : ks) k *= constants::hbar_c_mev_fm;
  std::array<double, 3> k_tau_phi{}, tau_dwell{};
  double tau_phi_scale = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double E = ks[i] * ks[i] / (2.0 * ch.reduced_mass);
    const AmplitudePoint ap = evaluate(model, E, ch);
    if (ap.pole)
      throw NumericalError("threshold_limits: pole at probe energy");
    const Wavenumber kin = wavenumber(E, ch);
    const double tp = phase_time_delay(ap, kin, ch);
    k_tau_phi[i] = ks[i] * tp;
    tau_dwell[i] = tp - self_interference_delay(ap, kin, ch);
    tau_phi_scale = std::max(tau_phi_scale, std::abs(tp));
  }
  const double floor_phi =
      1e-12 * std::max({std::abs(k_tau_phi[0]), std::abs(k_tau_phi[1]),
                        std::abs(k_tau_phi[2]), 1e-300});
  const auto r_phi = richardson_k2_limit(k_tau_phi[0], k_tau_phi[1],
                                         k_tau_phi[2], floor_phi);
  const auto r_dwell = richardson_k2_limit(tau_dwell[0], tau_dwell[1],
                                           tau_dwell[2],
                                           1e-9 * tau_phi_scale);
  if (!r_phi.converged || !r_dwell.converged)
    throw NumericalError("threshold_limits: extrapolation did not converge");
  return {r_phi.limit, r_dwell.limit};
}

}  // namespace qdwell
