#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "qdwell/amplitudes.hpp"
#include "qdwell/numerics.hpp"

using namespace qdwell;

namespace {
ChannelConfig unit_channel() { return ChannelConfig{}; }

double energy_of_k(double k, double mu = 1.0) { return k * k / (2.0 * mu); }
}  // namespace

TEST_CASE("zero-range model", "[amplitudes]") {
  const auto ch = unit_channel();

  SECTION("t(0) = -2 pi a / mu") {
    const auto p = t_zero_range(1e-12, {1.0, 0.0}, ch);
    CHECK(std::abs(p.t - Complex(-2.0 * constants::pi, 0.0)) < 1e-5);
  }

  SECTION("tan(delta) = a k for real a") {
    const auto p = t_zero_range(energy_of_k(0.1), {1.0, 0.0}, ch);
    CHECK(p.delta.real() == Catch::Approx(std::atan(0.1)).epsilon(1e-12));
    CHECK(std::abs(p.eta - 1.0) < 1e-10);
    CHECK(std::abs(std::abs(p.S) - 1.0) < 1e-10);
  }

  SECTION("absorptive channel has |S| < 1") {
    const auto p = t_zero_range(energy_of_k(0.1), {0.0, 1.0}, ch);
    CHECK(p.eta < 0.9);
    CHECK(p.eta > 0.0);
  }

  SECTION("a = 0 is rejected") {
    CHECK_THROWS_AS(t_zero_range(0.5, {0.0, 0.0}, ch), InputError);
  }

  SECTION("continued bound-state pole is flagged, not fatal") {
    // 1/a + kappa = 0 at kappa = 1 for a = -1, i.e. E = -0.5
    const auto p = t_zero_range(-0.5, {-1.0, 0.0}, ch);
    CHECK(p.pole);
  }
}

TEST_CASE("effective-range model", "[amplitudes]") {
  const auto ch = unit_channel();

  SECTION("r_e = 0 reduces to the zero-range model") {
    for (double E : {0.02, 0.5, 3.0, -0.3}) {
      const auto a = t_zero_range(E, {0.7, 0.2}, ch);
      const auto b = t_effective_range(E, {0.7, 0.2}, 0.0, ch);
      CHECK(std::abs(a.t - b.t) <= 1e-12 * std::abs(a.t));
      CHECK(std::abs(a.dt_dE - b.dt_dE) <= 1e-12 * std::abs(a.dt_dE));
    }
  }

  SECTION("threshold limit is independent of r_e") {
    const auto p = t_effective_range(1e-12, {1.0, 0.0}, 2.5, ch);
    CHECK(std::abs(p.t - Complex(-2.0 * constants::pi, 0.0)) < 1e-5);
  }

  SECTION("closed-form phase at k = 0.2, a = 2, r_e = 1") {
    const auto p =
        t_effective_range(energy_of_k(0.2), {2.0, 0.0}, 1.0, ch);
    const double expected = std::atan(0.2 / (0.5 - 0.5 * 0.04));
    CHECK(p.delta.real() == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("Breit-Wigner model", "[amplitudes]") {
  const auto ch = unit_channel();
  const BreitWignerParams bw{10.0, 0.2};

  SECTION("resonance phase passes pi/2") {
    const auto p = t_breit_wigner(10.0, bw, ch);
    CHECK(circular_distance(p.delta.real(), 0.5 * constants::pi,
                            constants::pi) < 1e-12);
    CHECK(std::abs(p.eta - 1.0) < 1e-12);
  }

  SECTION("far below resonance the phase is small") {
    const auto p = t_breit_wigner(0.001, bw, ch);
    CHECK(std::abs(p.delta.real()) < 0.02);
    CHECK(p.delta.real() > 0.0);
  }

  SECTION("half-width points sit pi/4 off resonance") {
    const auto below = t_breit_wigner(10.0 - 0.1, bw, ch);
    const auto above = t_breit_wigner(10.0 + 0.1, bw, ch);
    CHECK(circular_distance(below.delta.real(), 0.25 * constants::pi,
                            constants::pi) < 1e-12);
    CHECK(circular_distance(above.delta.real(), 0.75 * constants::pi,
                            constants::pi) < 1e-12);
  }

  SECTION("rejects E <= 0 and bad parameters") {
    CHECK_THROWS_AS(t_breit_wigner(-1.0, bw, ch), InputError);
    CHECK_THROWS_AS(t_breit_wigner(1.0, {10.0, -0.2}, ch), InputError);
  }
}

TEST_CASE("tabulated model", "[amplitudes]") {
  const auto ch = unit_channel();
  const ComplexScatteringLength a{0.6, 0.3};
  std::vector<double> E(200), tre(200), tim(200);
  for (int i = 0; i < 200; ++i) {
    E[i] = 0.3 + 2.0 * i / 199.0;
    const auto p = t_zero_range(E[i], a, ch);
    tre[i] = p.t.real();
    tim[i] = p.t.imag();
  }
  const TabulatedTMatrix table(E, tre, tim);

  SECTION("knots reproduce the samples") {
    for (int i : {0, 57, 123, 199}) {
      const auto p = table.at(E[i], ch);
      CHECK(p.t.real() == Catch::Approx(tre[i]).margin(1e-14));
      CHECK(p.t.imag() == Catch::Approx(tim[i]).margin(1e-14));
    }
  }

  SECTION("midpoints match the generating model to 1e-6") {
    double worst = 0.0;
    for (int i = 0; i + 1 < 200; ++i) {
      const double e = 0.5 * (E[i] + E[i + 1]);
      const auto direct = t_zero_range(e, a, ch);
      const auto interp = table.at(e, ch);
      worst = std::max(worst, std::abs(interp.t - direct.t) /
                                  std::abs(direct.t));
    }
    CHECK(worst < 1e-6);
  }

  SECTION("interpolant derivative is self-consistent") {
    for (double e : {0.41, 0.93, 1.57, 2.11}) {
      const Complex fd =
          (table.at(e + 1e-6, ch).t - table.at(e - 1e-6, ch).t) / 2e-6;
      const auto p = table.at(e, ch);
      CHECK(std::abs(p.dt_dE - fd) <= 1e-6 * std::abs(fd));
    }
  }

  SECTION("short tables and range violations are rejected") {
    std::vector<double> e3 = {0.1, 0.2, 0.3}, v3 = {1, 2, 3};
    CHECK_THROWS_AS(TabulatedTMatrix(e3, v3, v3), InputError);
    CHECK_THROWS_AS(table.at(0.1, ch), InputError);
    CHECK_THROWS_AS(table.at(5.0, ch), InputError);
  }
}

TEST_CASE("reflection asymptotics", "[amplitudes]") {
  SECTION("R -> -1 at threshold") {
    const Complex r = reflection_asymptotics({1.0, 0.0}, 1e-9);
    CHECK(std::abs(r - Complex(-1.0, 0.0)) < 3e-9);
  }

  SECTION("phase pi - 2 a k") {
    const Complex r = reflection_asymptotics({1.0, 0.0}, 0.01);
    CHECK(std::arg(r) == Catch::Approx(constants::pi - 0.02).epsilon(1e-14));
  }

  SECTION("model reflection phase approaches the asymptote") {
    // the unsigned phases agree to O((ak)^3); signed phases are conjugate
    const double k = 1e-3;
    const auto p = t_zero_range(energy_of_k(k), {1.0, 0.0}, unit_channel());
    const double model_phase = std::abs(std::arg(-p.S));
    CHECK(std::abs(model_phase - (constants::pi - 2.0 * k)) < 1e-6);
  }
}

TEST_CASE("amplitude invariants", "[amplitudes]") {
  const auto ch = unit_channel();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ar(0.2, 3.0), er(0.0, 2.0),
      loge(-4.0, 0.5);

  SECTION("lossless models are unitary and R = -S") {
    for (int i = 0; i < 100; ++i) {
      const double E = std::pow(10.0, loge(rng));
      const ComplexScatteringLength a{ar(rng), 0.0};
      AmplitudePoint p;
      switch (i % 3) {
        case 0: p = t_zero_range(E, a, ch); break;
        case 1: p = t_effective_range(E, a, er(rng), ch); break;
        default: p = t_breit_wigner(E, {5.0, 0.5}, ch); break;
      }
      CHECK(std::abs(std::abs(p.S) - 1.0) <= 1e-10);
      CHECK(std::abs(p.eta - 1.0) <= 1e-10);
      CHECK(p.R_amp == -p.S);
      CHECK(std::abs(p.S - (1.0 - Complex(0, 1) * ch.reduced_mass *
                                      wavenumber(E, ch).k * p.t /
                                      constants::pi)) <= 1e-12);
    }
  }

  SECTION("analytic dt/dE matches a five-point stencil") {
    for (int i = 0; i < 60; ++i) {
      const double E = std::pow(10.0, loge(rng));
      const ComplexScatteringLength a{ar(rng), 0.3 * er(rng)};
      const double re = er(rng);
      auto t_of = [&](double e) {
        return t_effective_range(e, a, re, ch).t;
      };
      const double h = 1e-3 * E;
      const Complex fd = five_point_derivative(t_of, E, h);
      const Complex an = t_effective_range(E, a, re, ch).dt_dE;
      CHECK(std::abs(an - fd) <= 1e-7 * std::abs(an));
    }
    // Breit-Wigner, with the stencil well inside the resonance width
    const BreitWignerParams bw{10.0, 0.2};
    for (double E : {9.5, 9.9, 10.0, 10.2, 11.0}) {
      auto t_of = [&](double e) { return t_breit_wigner(e, bw, ch).t; };
      const Complex fd = five_point_derivative(t_of, E, 5e-4);
      const Complex an = t_breit_wigner(E, bw, ch).dt_dE;
      CHECK(std::abs(an - fd) <= 1e-7 * std::abs(an));
    }
  }

  SECTION("sign convention: delta_R > 0 for small k, a > 0") {
    for (double k : {1e-3, 1e-2, 0.1}) {
      const auto p =
          t_zero_range(energy_of_k(k), {0.8, 0.0}, unit_channel());
      CHECK(p.delta.real() > 0.0);
    }
  }
}
