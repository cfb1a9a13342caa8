#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <variant>
#include <vector>

#include "qdwell/common.hpp"
#include "qdwell/interp.hpp"
#include "qdwell/kinematics.hpp"
#include "qdwell/numerics.hpp"

namespace qdwell {

//! V(r) = -depth for r < radius (positive depth = attractive well); the
//! depth may be complex with Im V <= 0 for absorption.
struct SquareWellPotential {
  Complex depth{};
  double radius = 0.0;
};

struct HardSpherePotential {
  double radius = 0.0;
};

//! Sampled potential; r strictly increasing and starting within one mesh
//! step of the origin, V -> 0 by the end of the table.
struct TabulatedPotential {
  std::vector<double> r;
  std::vector<Complex> v;
};

using RadialPotential =
    std::variant<SquareWellPotential, HardSpherePotential, TabulatedPotential>;

struct PhaseShiftPoint {
  double E = 0.0;
  int l = 0;
  Complex delta{};         // radians, principal value mod pi
  //! Radial nodes of Re(u) over the whole integrated range. At E -> 0+ the
  //! regular solution has one node per bound state, so this doubles as a
  //! bound-state counter.
  int node_count = 0;
};

struct RadialSolverOptions {
  int steps = 4000;           // nominal mesh resolution over the span
  double match_radius = 0.0;  // 0 selects 1.5 * potential extent
};

namespace radial_detail {

inline double riccati_j(int l, double x) {
  return x * std::sph_bessel(static_cast<unsigned>(l), x);
}
inline double riccati_n(int l, double x) {
  return x * std::sph_neumann(static_cast<unsigned>(l), x);
}
inline double riccati_j_prime(int l, double x) {
  if (l == 0) return std::cos(x);
  return x * std::sph_bessel(static_cast<unsigned>(l - 1), x) -
         l * std::sph_bessel(static_cast<unsigned>(l), x);
}
inline double riccati_n_prime(int l, double x) {
  if (l == 0) return std::sin(x);
  return x * std::sph_neumann(static_cast<unsigned>(l - 1), x) -
         l * std::sph_neumann(static_cast<unsigned>(l), x);
}

// One Numerov sweep of u'' = f(r) u over uniform nodes, in the
// w-transformed form w = (1 - h^2 f/12) u, w_{j+1} = 2 w_j - w_{j-1}
// + h^2 f_j u_j. The dominant update is a plain second difference, which
// keeps per-step rounding drift far below the match tolerance. `f` is
// indexed by node; u must hold the two seed values at i0-1 and i0.
template <typename FFn>
inline void numerov(std::vector<Complex>& u, const FFn& f, double h,
                    std::size_t i0) {
  const double h2 = h * h;
  Complex fm = f(i0 - 1), f0 = f(i0);
  Complex wm = u[i0 - 1] * (1.0 - h2 * fm / 12.0);
  Complex w0 = u[i0] * (1.0 - h2 * f0 / 12.0);
  for (std::size_t j = i0; j + 1 < u.size(); ++j) {
    const Complex fp = f(j + 1);
    const Complex wp = 2.0 * w0 - wm + h2 * f0 * u[j];
    u[j + 1] = wp / (1.0 - h2 * fp / 12.0);
    wm = w0;
    w0 = wp;
    f0 = fp;
  }
}

inline Complex match_delta(const std::vector<Complex>& u, double r_start,
                           double h, double k, int l) {
  const std::size_t j2 = u.size() - 1;
  const std::size_t j1 = j2 - 10;
  const double x1 = k * (r_start + j1 * h);
  const double x2 = k * (r_start + j2 * h);
  const double jj1 = riccati_j(l, x1), nn1 = riccati_n(l, x1);
  const double jj2 = riccati_j(l, x2), nn2 = riccati_n(l, x2);
  const double det = jj1 * nn2 - jj2 * nn1;
  if (std::abs(det) < 1e-14) throw NumericalError("degenerate match");
  const Complex a = (u[j1] * nn2 - u[j2] * nn1) / det;
  const Complex b = (u[j2] * jj1 - u[j1] * jj2) / det;
  // u = C [cos(delta) j^ - sin(delta) n^]  =>  tan(delta) = -b/a
  return std::atan(-b / a);
}

inline int count_nodes(const std::vector<Complex>& u) {
  int n = 0;
  for (std::size_t j = 1; j + 1 < u.size(); ++j)
    if (u[j].real() * u[j + 1].real() < 0.0) ++n;
  return n;
}

inline double potential_extent(const RadialPotential& pot) {
  return std::visit(
      [](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TabulatedPotential>)
          return p.r.back();
        else
          return p.radius;
      },
      pot);
}

}  // namespace radial_detail

//! Numerov phase shift for one energy: integrate
//!   u'' = [2 mu (V - E) + l(l+1)/r^2] u
//! outward from a node of the regular solution and read delta_l off a
//! two-radius match against Riccati-Bessel free solutions. Complex
//! arithmetic throughout, so optical (Im V <= 0) potentials give
//! complex delta directly.
inline PhaseShiftPoint solve_phase_shift(double E, int l,
                                         const RadialPotential& pot,
                                         const ChannelConfig& ch,
                                         const RadialSolverOptions& opts = {}) {
  ch.validate();
  if (!(E > 0.0)) throw InputError("radial: E must be positive");
  if (l < 0) throw InputError("radial: l must be non-negative");
  if (opts.steps < 64) throw InputError("radial: too few steps");
  const double mu = ch.reduced_mass;
  const double k = std::sqrt(2.0 * mu * E);
  const double extent = radial_detail::potential_extent(pot);
  if (!(extent > 0.0)) throw InputError("radial: potential extent not positive");
  double r_match = opts.match_radius > 0.0 ? opts.match_radius : 1.5 * extent;
  if (r_match < extent)
    throw InputError("radial: match radius inside the potential");

  PhaseShiftPoint out;
  out.E = E;
  out.l = l;

  if (const auto* hs = std::get_if<HardSpherePotential>(&pot)) {
    // u vanishes on the wall; integrate the free region only.
    const double rs = hs->radius;
    const double span = r_match - rs;
    const double h = span / opts.steps;
    std::vector<Complex> u(static_cast<std::size_t>(opts.steps) + 11);
    u[0] = 0.0;
    u[1] = h;
    auto f = [&](std::size_t j) -> Complex {
      const double r = rs + j * h;
      const double cf = l > 0 ? l * (l + 1) / (r * r) : 0.0;
      return Complex(-k * k + cf, 0.0);
    };
    radial_detail::numerov(u, f, h, 1);
    out.node_count = radial_detail::count_nodes(u);
    out.delta = radial_detail::match_delta(u, rs, h, k, l);
    return out;
  }

  if (const auto* sw = std::get_if<SquareWellPotential>(&pot)) {
    // Interface snapped onto a mesh node; the discontinuity is bridged by
    // transferring (u, u') to the exact free form rather than stepping
    // Numerov across the jump, which would cost two orders of accuracy.
    const double rw = sw->radius;
    const double h_t = r_match / opts.steps;
    const int n1 = std::max(8, static_cast<int>(std::lround(rw / h_t)));
    const double h = rw / n1;
    const Complex f_in = 2.0 * mu * (-sw->depth - E);

    std::vector<Complex> u(static_cast<std::size_t>(n1) + 1);
    std::size_t seed;
    if (l == 0) {
      u[0] = 0.0;
      u[1] = h;
      seed = 1;
    } else {
      const Complex c1 = f_in / (4.0 * l + 6.0);
      u[1] = std::pow(h, l + 1) * (1.0 + c1 * h * h);
      u[2] = std::pow(2.0 * h, l + 1) * (1.0 + 4.0 * c1 * h * h);
      seed = 2;
    }
    auto f = [&](std::size_t j) -> Complex {
      const double r = j * h;
      const double cf = l > 0 ? l * (l + 1) / (r * r) : 0.0;
      return f_in + cf;
    };
    radial_detail::numerov(u, f, h, seed);
    out.node_count = radial_detail::count_nodes(u);

    const std::size_t m = u.size() - 1;
    const Complex up = (25.0 * u[m] - 48.0 * u[m - 1] + 36.0 * u[m - 2] -
                        16.0 * u[m - 3] + 3.0 * u[m - 4]) /
                       (12.0 * h);
    const double x0 = k * rw;
    const double a11 = radial_detail::riccati_j(l, x0);
    const double a12 = radial_detail::riccati_n(l, x0);
    const double a21 = k * radial_detail::riccati_j_prime(l, x0);
    const double a22 = k * radial_detail::riccati_n_prime(l, x0);
    const double det = a11 * a22 - a12 * a21;
    if (std::abs(det) < 1e-14)
      throw NumericalError("degenerate match at interface");
    const Complex af = (u[m] * a22 - a12 * up) / det;
    const Complex bf = (a11 * up - u[m] * a21) / det;

    const int n_out =
        static_cast<int>(std::ceil((r_match - rw) / h)) + 10;
    std::vector<Complex> v(static_cast<std::size_t>(n_out) + 1);
    v[0] = u[m];
    const double x1 = k * (rw + h);
    v[1] = af * radial_detail::riccati_j(l, x1) +
           bf * radial_detail::riccati_n(l, x1);
    auto fo = [&](std::size_t j) -> Complex {
      const double r = rw + j * h;
      const double cf = l > 0 ? l * (l + 1) / (r * r) : 0.0;
      return Complex(-k * k + cf, 0.0);
    };
    radial_detail::numerov(v, fo, h, 1);
    out.node_count += radial_detail::count_nodes(v);
    out.delta = radial_detail::match_delta(v, rw, h, k, l);
    return out;
  }

  const auto& tab = std::get<TabulatedPotential>(pot);
  if (tab.r.size() < 4 || tab.r.size() != tab.v.size())
    throw InputError("radial: tabulated potential needs >= 4 (r, V) samples");
  const double span = r_match;
  const double h = span / opts.steps;
  if (tab.r.front() > h)
    throw InputError("radial: table must start within one mesh step of r=0");
  std::vector<double> vre(tab.v.size()), vim(tab.v.size());
  for (std::size_t i = 0; i < tab.v.size(); ++i) {
    vre[i] = tab.v[i].real();
    vim[i] = tab.v[i].imag();
  }
  const PchipInterpolator pre(tab.r, vre), pim(tab.r, vim);
  auto vat = [&](double r) -> Complex {
    if (r <= tab.r.front()) return tab.v.front();
    if (r >= tab.r.back()) return {0.0, 0.0};
    return {pre(r), pim(r)};
  };
  if (std::abs(vat(r_match)) >= 1e-12)
    throw InputError("radial: potential not negligible at match radius");
  const std::size_t n_total = static_cast<std::size_t>(opts.steps) + 10;
  std::vector<Complex> u(n_total + 1);
  auto f = [&](std::size_t j) -> Complex {
    const double r = j * h;
    const double cf = (l > 0 && r > 0.0) ? l * (l + 1) / (r * r) : 0.0;
    return 2.0 * mu * (vat(r) - E) + cf;
  };
  std::size_t seed;
  if (l == 0) {
    u[0] = 0.0;
    u[1] = h;
    seed = 1;
  } else {
    const Complex c1 = 2.0 * mu * (vat(0.0) - E) / (4.0 * l + 6.0);
    u[1] = std::pow(h, l + 1) * (1.0 + c1 * h * h);
    u[2] = std::pow(2.0 * h, l + 1) * (1.0 + 4.0 * c1 * h * h);
    seed = 2;
  }
  radial_detail::numerov(u, f, h, seed);
  out.node_count = radial_detail::count_nodes(u);
  out.delta = radial_detail::match_delta(u, 0.0, h, k, l);
  return out;
}

//! Phase shifts over a grid, unwrapped along energy by minimal-jump
//! continuation in multiples of pi so the curve is differentiable.
inline std::vector<PhaseShiftPoint> phase_shift_spectrum(
    const RadialPotential& pot, int l, std::span<const double> grid,
    const ChannelConfig& ch, const RadialSolverOptions& opts = {}) {
  if (grid.empty()) throw InputError("radial: empty grid");
  std::vector<PhaseShiftPoint> out;
  out.reserve(grid.size());
  for (double e : grid)
    out.push_back(solve_phase_shift(e, l, pot, ch, opts));
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double prev = out[i - 1].delta.real();
    const double cur = out[i].delta.real();
    const double shift =
        std::round((prev - cur) / constants::pi) * constants::pi;
    out[i].delta += shift;
  }
  return out;
}

//! Convert an elastic phase shift to the t-matrix convention used by the
//! delay formulas: S = e^{2 i delta}, t = i pi (S - 1)/(mu k).
inline Complex t_from_delta(Complex delta, double k, double mu) {
  const Complex S = std::exp(2.0 * Complex(0, 1) * delta);
  return Complex(0, 1) * constants::pi * (S - 1.0) / (mu * k);
}

}  // namespace qdwell
