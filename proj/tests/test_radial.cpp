#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qdwell/delays.hpp"
#include "qdwell/numerics.hpp"
#include "qdwell/radial.hpp"

using namespace qdwell;

namespace {
ChannelConfig unit_channel() { return ChannelConfig{}; }

double mod_pi_err(double a, double b) {
  return circular_distance(a, b, constants::pi);
}
}  // namespace

TEST_CASE("free and hard-sphere phase shifts", "[radial]") {
  const auto ch = unit_channel();

  SECTION("vanishing potential gives zero phase shift") {
    const RadialPotential pot = SquareWellPotential{{0.0, 0.0}, 1.0};
    for (double E : {0.3, 1.1, 4.0}) {
      const auto p = solve_phase_shift(E, 0, pot, ch);
      CHECK(std::abs(p.delta) < 1e-10);
    }
  }

  SECTION("hard sphere, l = 0: delta = -k R to 1e-8") {
    const RadialPotential pot = HardSpherePotential{1.0};
    for (int i = 0; i < 50; ++i) {
      const double E = 0.1 + i * (5.0 - 0.1) / 49.0;
      const double k = std::sqrt(2.0 * E);
      const auto p = solve_phase_shift(E, 0, pot, ch);
      CHECK(mod_pi_err(p.delta.real(), -k) <= 1e-8);
    }
  }

  SECTION("hard sphere, l = 1: tan(delta) = j1(kR)/n1(kR)") {
    const RadialPotential pot = HardSpherePotential{1.0};
    for (double E : {0.5, 1.5, 3.0}) {
      const double k = std::sqrt(2.0 * E);
      const double expect =
          std::atan(std::sph_bessel(1, k) / std::sph_neumann(1, k));
      const auto p = solve_phase_shift(E, 1, pot, ch);
      CHECK(mod_pi_err(p.delta.real(), expect) <= 1e-6);
    }
  }
}

TEST_CASE("square well against the analytic matching formula", "[radial]") {
  const auto ch = unit_channel();
  const SquareWellPotential well{{4.0, 0.0}, 1.0};
  const RadialPotential pot = well;

  SECTION("l = 0 over 100 energies to 1e-6 rad") {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double E = 0.05 + i * (5.0 - 0.05) / 99.0;
      const auto p = solve_phase_shift(E, 0, pot, ch);
      const auto exact =
          oracles::square_well_delta0(E, well.depth, well.radius, 1.0);
      worst = std::max(worst, mod_pi_err(p.delta.real(), exact.real()));
    }
    CHECK(worst <= 1e-6);
  }

  SECTION("step halving gains at least a factor 8 (4th order)") {
    for (double E : {0.7, 1.3, 2.9}) {
      const auto exact =
          oracles::square_well_delta0(E, well.depth, well.radius, 1.0);
      RadialSolverOptions coarse, fine;
      coarse.steps = 200;
      fine.steps = 400;
      const double e1 = mod_pi_err(
          solve_phase_shift(E, 0, pot, ch, coarse).delta.real(),
          exact.real());
      const double e2 = mod_pi_err(
          solve_phase_shift(E, 0, pot, ch, fine).delta.real(), exact.real());
      CHECK(e1 / e2 >= 8.0);
      CHECK(e1 / e2 <= 40.0);  // sanity: not just noise
    }
  }

  SECTION("weak well limit: delta goes to zero uniformly") {
    const RadialPotential weak = SquareWellPotential{{1e-8, 0.0}, 1.0};
    for (double E : {0.2, 1.0, 3.0}) {
      const auto p = solve_phase_shift(E, 0, weak, ch);
      CHECK(std::abs(p.delta.real()) < 1e-7);
    }
  }
}

TEST_CASE("spectrum unwrapping and Levinson behaviour", "[radial]") {
  const auto ch = unit_channel();
  // sqrt(2 mu V0) R = 2.83 lies in (pi/2, 3pi/2): exactly one bound state
  const RadialPotential pot = SquareWellPotential{{4.0, 0.0}, 1.0};
  const auto grid = energy_grid({0.01, 20.0, 120, GridSpacing::linear});
  auto shifts = phase_shift_spectrum(pot, 0, grid, ch);
  REQUIRE(shifts.size() == grid.size());

  SECTION("node count oracle sees one bound state") {
    CHECK(shifts.front().node_count == 1);
  }

  SECTION("unwrapped curve is continuous") {
    for (std::size_t i = 1; i < shifts.size(); ++i)
      CHECK(std::abs(shifts[i].delta.real() - shifts[i - 1].delta.real()) <
            0.5);
  }

  SECTION("delta(0+) starts near pi once anchored at high energy") {
    // shift the whole curve so the last point lies in [0, pi)
    double offset = 0.0;
    const double last = shifts.back().delta.real();
    offset = -std::floor(last / constants::pi) * constants::pi;
    const double first = shifts.front().delta.real() + offset;
    CHECK(first > 0.8 * constants::pi);
    CHECK(first < constants::pi);
    CHECK(first - (last + offset) > 2.0);  // net Levinson-style descent
  }
}

TEST_CASE("absorptive well", "[radial]") {
  const auto ch = unit_channel();
  // depth (4, 0.5) means V = -4 - 0.5i inside: Im V <= 0, absorption
  const RadialPotential pot = SquareWellPotential{{4.0, 0.5}, 1.0};
  for (double E : {0.5, 1.5, 3.0}) {
    const auto p = solve_phase_shift(E, 0, pot, ch);
    CHECK(p.delta.imag() >= -1e-12);
    CHECK(std::abs(p.delta.imag()) > 1e-4);  // genuinely complex
  }
}

TEST_CASE("tabulated potential", "[radial]") {
  const auto ch = unit_channel();
  // sample the square well densely enough that the interpolated potential
  // reproduces it away from the wall; compare against a soft-edge profile
  // instead: V(r) = -V0 exp(-(r/R)^6) is smooth and integrable by Numerov
  TabulatedPotential tab;
  for (int i = 0; i <= 400; ++i) {
    const double r = 3.0 * i / 400.0 + 1e-4;
    tab.r.push_back(r);
    const double v = -4.0 * std::exp(-std::pow(r / 1.0, 6));
    tab.v.emplace_back(v, 0.0);
  }
  const RadialPotential pot = tab;

  SECTION("solves and stays real for a real potential") {
    const auto p = solve_phase_shift(1.0, 0, pot, ch);
    CHECK(std::abs(p.delta.imag()) < 1e-10);
    CHECK(std::isfinite(p.delta.real()));
  }

  SECTION("rejects tables that do not decay") {
    TabulatedPotential bad;
    for (int i = 0; i <= 10; ++i) {
      bad.r.push_back(0.01 + i * 0.3);
      bad.v.emplace_back(-1.0, 0.0);
    }
    CHECK_THROWS_AS(solve_phase_shift(1.0, 0, RadialPotential{bad}, ch),
                    InputError);
  }
}

TEST_CASE("radial-to-delays consistency", "[radial]") {
  // Wigner delay from the t-matrix route equals 2 d(delta)/dE for real delta
  const auto ch = unit_channel();
  const RadialPotential pot = SquareWellPotential{{4.0, 0.0}, 1.0};
  const auto grid = energy_grid({0.5, 3.0, 200, GridSpacing::linear});
  const auto shifts = phase_shift_spectrum(pot, 0, grid, ch);

  std::vector<Complex> t(grid.size());
  std::vector<double> delta_r(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = std::sqrt(2.0 * grid[i]);
    t[i] = t_from_delta(shifts[i].delta, k, 1.0);
    delta_r[i] = shifts[i].delta.real();
  }
  const auto dt = derivative_series<Complex>(grid, t);
  const auto ddelta = derivative_series<double>(grid, delta_r);

  for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
    const auto ap = amplitude_from_t(grid[i], t[i], dt[i], ch);
    const double tp = phase_time_delay(ap, wavenumber(grid[i], ch), ch);
    CHECK(std::abs(tp - 2.0 * ddelta[i]) <=
          1e-6 * std::max(std::abs(tp), 1e-6));
  }
}

TEST_CASE("hard sphere implies near-threshold time advancement", "[radial]") {
  // delta = -k R_s maps onto a_R = -R_s < 0, so the Wigner delay built from
  // the radial phase shifts must be negative close to threshold
  const auto ch = unit_channel();
  const RadialPotential pot = HardSpherePotential{1.0};
  const auto grid = energy_grid({0.005, 0.1, 40, GridSpacing::linear});
  const auto shifts = phase_shift_spectrum(pot, 0, grid, ch);
  std::vector<Complex> t(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    t[i] = t_from_delta(shifts[i].delta, std::sqrt(2.0 * grid[i]), 1.0);
  const auto dt = derivative_series<Complex>(grid, t);
  for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
    const auto ap = amplitude_from_t(grid[i], t[i], dt[i], ch);
    CHECK(phase_time_delay(ap, wavenumber(grid[i], ch), ch) < 0.0);
  }
}

TEST_CASE("radial error paths", "[radial]") {
  const auto ch = unit_channel();
  const RadialPotential pot = SquareWellPotential{{4.0, 0.0}, 1.0};
  CHECK_THROWS_AS(solve_phase_shift(-1.0, 0, pot, ch), InputError);
  CHECK_THROWS_AS(solve_phase_shift(1.0, -1, pot, ch), InputError);
  RadialSolverOptions bad;
  bad.match_radius = 0.5;  // inside the well
  CHECK_THROWS_AS(solve_phase_shift(1.0, 0, pot, ch, bad), InputError);
  bad = {};
  bad.steps = 8;
  CHECK_THROWS_AS(solve_phase_shift(1.0, 0, pot, ch, bad), InputError);
  // k * 10h below 1e-14 collapses the free-solution match
  CHECK_THROWS_AS(solve_phase_shift(1e-28, 0, pot, ch), NumericalError);
}
