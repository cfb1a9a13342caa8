#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qdwell/common.hpp"

namespace qdwell {

enum class UnitSystem { natural, mev_fm };

//! One scattering channel. All stored quantities are in internal hbar=1
//! units (energies in the channel's energy unit, lengths in its inverse);
//! the mev_fm system only changes how the I/O layer converts values on
//! the way in and out.
struct ChannelConfig {
  double reduced_mass = 1.0;      // energy units
  double threshold_energy = 0.0;  // E_th; grid energies are relative to it
  int partial_wave = 0;
  UnitSystem units = UnitSystem::natural;

  void validate() const {
    if (!(reduced_mass > 0.0))
      throw InputError("channel: reduced mass must be positive");
    if (partial_wave < 0)
      throw InputError("channel: partial wave must be non-negative");
  }
};

//! Channel wavenumber at energy E relative to threshold, together with its
//! analytic energy derivative. Real for E>0; for E<0 the branch k = i*kappa
//! (kappa > 0) is taken, so bound-state-side continuations stay on one
//! code path.
struct Wavenumber {
  Complex k;
  Complex dk_dE;
};

inline Wavenumber wavenumber(double E, const ChannelConfig& ch) {
  ch.validate();
  if (E == 0.0)
    throw InputError("threshold point; use limit operations");
  const double mu = ch.reduced_mass;
  if (E > 0.0) {
    const double k = std::sqrt(2.0 * mu * E);
    return {Complex(k, 0.0), Complex(mu / k, 0.0)};
  }
  const double kappa = std::sqrt(-2.0 * mu * E);
  return {Complex(0.0, kappa), Complex(0.0, -mu / kappa)};
}

enum class GridSpacing { linear, log_from_threshold };

struct GridSpec {
  double e_min = 0.0;
  double e_max = 0.0;
  int n_points = 0;
  GridSpacing spacing = GridSpacing::linear;
};

// Strictly increasing energy grid. E = 0 is excluded everywhere in this
// library (every delay formula carries an explicit 1/k), so a linear grid
// that lands exactly on threshold gets that node nudged off it.
inline std::vector<double> energy_grid(const GridSpec& spec) {
  if (!(spec.e_min < spec.e_max))
    throw InputError("grid: e_min must be below e_max");
  if (spec.n_points < 2) throw InputError("grid: need at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(spec.n_points));
  const int n = spec.n_points;
  if (spec.spacing == GridSpacing::log_from_threshold) {
    if (!(spec.e_min > 0.0))
      throw InputError("grid: log spacing requires e_min > 0");
    const double ratio = std::pow(spec.e_max / spec.e_min, 1.0 / (n - 1));
    double v = spec.e_min;
    for (int i = 0; i < n; ++i) {
      grid[i] = (i == n - 1) ? spec.e_max : v;
      v *= ratio;
    }
    return grid;
  }
  const double step = (spec.e_max - spec.e_min) / (n - 1);
  for (int i = 0; i < n; ++i)
    grid[i] = (i == n - 1) ? spec.e_max : spec.e_min + i * step;
  const double eps = (spec.e_max - spec.e_min) * 1e-12;
  for (double& e : grid)
    if (e == 0.0) e = eps;
  return grid;
}

// --- unit conversions, applied only at I/O boundaries ---

inline double length_to_internal(double value, UnitSystem units) {
  return units == UnitSystem::mev_fm ? value / constants::hbar_c_mev_fm
                                     : value;
}

enum class TimeUnit { hbar_per_energy, seconds, fm_per_c };

inline double time_from_internal(double value, UnitSystem units,
                                 TimeUnit unit) {
  switch (unit) {
    case TimeUnit::hbar_per_energy:
      return value;
    case TimeUnit::seconds:
      if (units != UnitSystem::mev_fm)
        throw InputError("time unit 'seconds' requires mev_fm units");
      return value * constants::hbar_mev_s;
    case TimeUnit::fm_per_c:
      if (units != UnitSystem::mev_fm)
        throw InputError("time unit 'fm_per_c' requires mev_fm units");
      return value * constants::hbar_c_mev_fm;
  }
  throw InputError("unknown time unit");
}

}  // namespace qdwell
