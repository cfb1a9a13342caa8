#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdwell/common.hpp"
#include "qdwell/delays.hpp"
#include "qdwell/numerics.hpp"

namespace qdwell {

enum class DelayColumn { tau_dwell, tau_phase };

struct PeakCandidate {
  std::size_t index = 0;
  double E = 0.0;
  double height = 0.0;
  double prominence = 0.0;
  double width_estimate = 0.0;  // half-maximum width relative to prominence
};

namespace analysis_detail {

inline double column_value(const DelayPoint& p, DelayColumn c) {
  return c == DelayColumn::tau_dwell ? p.tau_dwell : p.tau_phase;
}

// Linear interpolation of the energy where y crosses `level`, scanning away
// from index i in direction dir until the base of the peak.
inline double half_crossing(std::span<const double> E,
                            std::span<const double> y, std::size_t i,
                            int dir, double level) {
  std::size_t j = i;
  while (true) {
    const std::size_t next = j + dir;
    if (next >= y.size()) return E[j];  // covers both ends via wraparound
    if (y[next] <= level) {
      const double frac = (y[j] - level) / (y[j] - y[next]);
      return E[j] + frac * (E[next] - E[j]);
    }
    if (y[next] > y[i]) return E[j];  // ran into a higher neighbouring peak
    j = next;
  }
}

}  // namespace analysis_detail

//! Local maxima with at least the requested prominence, most prominent
//! first; equal prominences order by increasing energy.
inline std::vector<PeakCandidate> find_peaks(std::span<const double> E,
                                             std::span<const double> y,
                                             double min_prominence) {
  if (E.size() != y.size()) throw InputError("find_peaks: size mismatch");
  if (E.size() < 7) throw InputError("find_peaks: need at least 7 points");
  std::vector<PeakCandidate> peaks;
  const std::size_t n = y.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // prominence: drop to the lowest point before a higher value is met
    double left_min = y[i], right_min = y[i];
    for (std::size_t j = i; j-- > 0;) {
      if (y[j] > y[i]) break;
      left_min = std::min(left_min, y[j]);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (y[j] > y[i]) break;
      right_min = std::min(right_min, y[j]);
    }
    const double prom = y[i] - std::max(left_min, right_min);
    if (prom < min_prominence) continue;
    PeakCandidate p;
    p.index = i;
    p.E = E[i];
    p.height = y[i];
    p.prominence = prom;
    const double level = y[i] - 0.5 * prom;
    const double lhs = analysis_detail::half_crossing(E, y, i, -1, level);
    const double rhs = analysis_detail::half_crossing(E, y, i, +1, level);
    p.width_estimate = rhs - lhs;
    peaks.push_back(p);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const PeakCandidate& a, const PeakCandidate& b) {
                     if (a.prominence != b.prominence)
                       return a.prominence > b.prominence;
                     return a.E < b.E;
                   });
  return peaks;
}

inline std::vector<PeakCandidate> find_peaks(const DelaySpectrum& spec,
                                             DelayColumn column,
                                             double min_prominence) {
  std::vector<double> E, y;
  E.reserve(spec.points.size());
  y.reserve(spec.points.size());
  for (const auto& p : spec.points) {
    E.push_back(p.E);
    y.push_back(analysis_detail::column_value(p, column));
  }
  return find_peaks(E, y, min_prominence);
}

//! Lorentzian-with-background fit result.
struct ResonanceFit {
  double e_res = 0.0;
  double gamma = 0.0;
  double amplitude = 0.0;
  double background = 0.0;
  double residual_norm = 0.0;  // rms residual / max |data|
  bool converged = false;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int iterations = 0;
  std::string diagnostic;
};

//! Damped (Levenberg-style) least-squares fit of
//!   y = c0 + A (G^2/4) / ((E - E_r)^2 + G^2/4)
//! initialised from the tallest sample and its half-maximum width.
//! Damping is multiplied by 10 on a rejected step and divided by 10 on an
//! accepted one; convergence requires a relative residual-norm change
//! below 1e-10 within 200 iterations, plus G > 0 and E_r inside the window.
inline ResonanceFit fit_lorentzian(std::span<const double> E_all,
                                   std::span<const double> y_all,
                                   double window_lo, double window_hi,
                                   const ResonanceFit* init = nullptr) {
  if (E_all.size() != y_all.size())
    throw InputError("fit_lorentzian: size mismatch");
  if (!(window_lo < window_hi))
    throw InputError("fit_lorentzian: empty window");
  std::vector<double> E, y;
  for (std::size_t i = 0; i < E_all.size(); ++i)
    if (E_all[i] >= window_lo && E_all[i] <= window_hi) {
      E.push_back(E_all[i]);
      y.push_back(y_all[i]);
    }
  ResonanceFit fit;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  const std::size_t n = E.size();
  if (n < 8) throw InputError("fit_lorentzian: fewer than 8 points in window");

  double y_max_abs = 0.0;
  std::size_t i_peak = 0;
  double y_min = y[0];
  for (std::size_t i = 0; i < n; ++i) {
    y_max_abs = std::max(y_max_abs, std::abs(y[i]));
    y_min = std::min(y_min, y[i]);
    if (y[i] > y[i_peak]) i_peak = i;
  }
  double c0 = y_min;
  double amp = y[i_peak] - y_min;
  double er = E[i_peak];
  const double level = y[i_peak] - 0.5 * amp;
  const double lhs = analysis_detail::half_crossing(E, y, i_peak, -1, level);
  const double rhs = analysis_detail::half_crossing(E, y, i_peak, +1, level);
  double gam = rhs - lhs;
  if (!(gam > 0.0)) gam = 0.25 * (window_hi - window_lo);
  if (init) {
    c0 = init->background;
    amp = init->amplitude;
    er = init->e_res;
    gam = init->gamma;
  }

  auto model = [](double e, double c, double a, double er_, double g) {
    const double u = e - er_;
    return c + a * (g * g / 4.0) / (u * u + g * g / 4.0);
  };
  auto ssr_of = [&](double c, double a, double er_, double g) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - model(E[i], c, a, er_, g);
      s += r * r;
    }
    return s;
  };

  double lambda = 1e-3;
  double ssr = ssr_of(c0, amp, er, gam);
  fit.diagnostic = "ok";
  bool converged_numerically = false;
  int it = 0;
  for (; it < 200; ++it) {
    // assemble J^T J and J^T r
    std::vector<double> jtj(16, 0.0), jtr(4, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = E[i] - er;
      const double g2 = gam * gam / 4.0;
      const double d = u * u + g2;
      const double shape = g2 / d;
      const double j0 = 1.0;
      const double j1 = shape;
      const double j2 = amp * g2 * 2.0 * u / (d * d);
      const double j3 = amp * (gam / 2.0) * u * u / (d * d);
      const double r = y[i] - model(E[i], c0, amp, er, gam);
      const double J[4] = {j0, j1, j2, j3};
      for (int a = 0; a < 4; ++a) {
        jtr[a] += J[a] * r;
        for (int b = 0; b < 4; ++b) jtj[a * 4 + b] += J[a] * J[b];
      }
    }
    std::vector<double> lhs_m = jtj, rhs_v = jtr;
    for (int a = 0; a < 4; ++a) lhs_m[a * 4 + a] += lambda * jtj[a * 4 + a];
    if (!solve_dense(lhs_m, rhs_v, 4)) {
      fit.diagnostic = "singular normal equations";
      break;
    }
    const double c0_n = c0 + rhs_v[0];
    const double amp_n = amp + rhs_v[1];
    const double er_n = er + rhs_v[2];
    const double gam_n = gam + rhs_v[3];
    const double ssr_n = ssr_of(c0_n, amp_n, er_n, gam_n);
    if (std::isfinite(ssr_n) && ssr_n <= ssr) {
      const double rn_old = std::sqrt(ssr / n);
      const double rn_new = std::sqrt(ssr_n / n);
      c0 = c0_n;
      amp = amp_n;
      er = er_n;
      gam = gam_n;
      ssr = ssr_n;
      lambda = std::max(lambda / 10.0, 1e-16);
      if (std::abs(rn_old - rn_new) <=
          1e-10 * std::max(rn_old, 1e-300)) {
        converged_numerically = true;
        ++it;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) {
        fit.diagnostic = "damping exhausted";
        break;
      }
    }
  }
  gam = std::abs(gam);  // the model is even in G
  fit.e_res = er;
  fit.gamma = gam;
  fit.amplitude = amp;
  fit.background = c0;
  fit.iterations = it;
  fit.residual_norm = std::sqrt(ssr / n) / std::max(y_max_abs, 1e-300);
  fit.converged = converged_numerically && gam > 0.0 && er >= window_lo &&
                  er <= window_hi && std::isfinite(fit.residual_norm);
  if (converged_numerically && !fit.converged)
    fit.diagnostic = "converged to unphysical parameters";
  if (!converged_numerically && fit.diagnostic == "ok")
    fit.diagnostic = "iteration limit reached";
  return fit;
}

inline ResonanceFit fit_lorentzian(const DelaySpectrum& spec,
                                   DelayColumn column, double window_lo,
                                   double window_hi) {
  std::vector<double> E, y;
  for (const auto& p : spec.points) {
    E.push_back(p.E);
    y.push_back(analysis_detail::column_value(p, column));
  }
  return fit_lorentzian(E, y, window_lo, window_hi);
}

enum class Verdict { resonance, time_advancement, threshold_artifact, none };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::resonance: return "resonance";
    case Verdict::time_advancement: return "time_advancement";
    case Verdict::threshold_artifact: return "threshold_artifact";
    case Verdict::none: return "none";
  }
  return "none";
}

struct Classification {
  Verdict verdict = Verdict::none;
  double min_dwell = 0.0;
  double min_dwell_energy = 0.0;
  bool has_threshold_pair = false;
  double phase_growth_ratio = 0.0;    // |tau_phi| growth toward threshold
  double dwell_change_fraction = 0.0; // matching tau_dwell variation
  bool negative_energy_peak = false;
  std::optional<ResonanceFit> fit;
  std::string summary;
};

//! Deterministic spectrum triage. Precedence: a significantly negative
//! dwell delay wins (time advancement, repulsive channel); next a 1/k-type
//! blow-up of tau_phase with flat tau_dwell near threshold (threshold
//! artifact, not a state); next a fitted Lorentzian peak in tau_dwell
//! (resonance, reported as "peak at E<0" when it sits below threshold).
inline Classification classify(const DelaySpectrum& spec) {
  if (spec.points.size() < 7)
    throw InputError("classify: need at least 7 spectrum points");
  Classification cls;
  const auto& pts = spec.points;
  const double mu = spec.channel.reduced_mass;

  cls.min_dwell = pts.front().tau_dwell;
  cls.min_dwell_energy = pts.front().E;
  for (const auto& p : pts)
    if (p.tau_dwell < cls.min_dwell) {
      cls.min_dwell = p.tau_dwell;
      cls.min_dwell_energy = p.E;
    }

  // near-threshold pair: lowest positive-energy point vs k about 10x higher
  const DelayPoint* lo = nullptr;
  const DelayPoint* hi = nullptr;
  for (const auto& p : pts)
    if (p.E > 0.0) {
      lo = &p;
      break;
    }
  if (lo) {
    const double k_lo = std::sqrt(2.0 * mu * lo->E);
    double best = std::numeric_limits<double>::max();
    for (const auto& p : pts) {
      if (p.E <= 0.0) continue;
      const double k = std::sqrt(2.0 * mu * p.E);
      if (k < 3.0 * k_lo) continue;
      const double miss = std::abs(k - 10.0 * k_lo);
      if (miss < best) {
        best = miss;
        hi = &p;
      }
    }
  }
  if (lo && hi) {
    cls.has_threshold_pair = true;
    cls.phase_growth_ratio =
        std::abs(lo->tau_phase) / std::max(std::abs(hi->tau_phase), 1e-300);
    cls.dwell_change_fraction =
        std::abs(lo->tau_dwell - hi->tau_dwell) /
        std::max(std::abs(hi->tau_dwell), 1e-9 * std::abs(hi->tau_phase));
  }

  const double scale_ref = std::abs(pts.back().tau_phase);
  if (cls.min_dwell < -1e-6 * std::max(scale_ref, 1e-300)) {
    cls.verdict = Verdict::time_advancement;
    cls.summary = "negative dwell time delay (repulsive channel)";
    return cls;
  }
  if (cls.has_threshold_pair && cls.phase_growth_ratio >= 9.999 &&
      cls.dwell_change_fraction < 0.1) {
    cls.verdict = Verdict::threshold_artifact;
    cls.summary =
        "phase delay diverges toward threshold while dwell delay stays flat";
    return cls;
  }

  std::vector<double> E, y;
  double y_min = pts.front().tau_dwell, y_max = y_min;
  for (const auto& p : pts) {
    E.push_back(p.E);
    y.push_back(p.tau_dwell);
    y_min = std::min(y_min, p.tau_dwell);
    y_max = std::max(y_max, p.tau_dwell);
  }
  const auto peaks = find_peaks(E, y, 0.1 * (y_max - y_min));
  if (!peaks.empty()) {
    const auto& top = peaks.front();
    double w = top.width_estimate > 0.0 ? top.width_estimate
                                        : (E.back() - E.front()) / 8.0;
    double wlo = std::max(top.E - 3.0 * w, E.front());
    double whi = std::min(top.E + 3.0 * w, E.back());
    std::size_t in_window = 0;
    for (double e : E)
      if (e >= wlo && e <= whi) ++in_window;
    if (in_window < 8) {
      wlo = E.front();
      whi = E.back();
    }
    const ResonanceFit fit = fit_lorentzian(E, y, wlo, whi);
    if (fit.converged) {
      cls.fit = fit;
      cls.verdict = Verdict::resonance;
      cls.negative_energy_peak = fit.e_res < 0.0;
      cls.summary = cls.negative_energy_peak
                        ? "Lorentzian dwell-delay peak at E < 0"
                        : "Lorentzian dwell-delay peak";
      return cls;
    }
  }
  cls.summary = "no significant structure";
  return cls;
}

}  // namespace qdwell
