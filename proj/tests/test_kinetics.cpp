#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "onsager/errors.hpp"
#include "onsager/kinetics.hpp"
#include "onsager/maier_saupe.hpp"
#include "oracles.hpp"

using namespace onsager;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> branch_coeffs(double b, std::size_t J) {
  std::vector<double> g(J);
  const double r = oracle::ms_root(b);
  for (std::size_t j = 0; j < J; ++j) g[j] = oracle::bessel_ratio(static_cast<int>(j + 1), r);
  return g;
}

std::vector<double> small_random(std::size_t J, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xi(-1.0, 1.0);
  std::vector<double> y(J);
  for (std::size_t j = 0; j < J; ++j) y[j] = amplitude * xi(rng) / static_cast<double>((j + 1) * (j + 1));
  return y;
}

}  // namespace

TEST_CASE("ode right-hand side") {
  CHECK(max_abs(kinetics::ode_rhs(std::vector<double>(8, 0.0), 7.0)) == 0.0);
  const auto d = kinetics::ode_rhs(std::vector<double>{0.3, 0.0, 0.0}, 0.0);
  CHECK(d[0] == doctest::Approx(-1.2).epsilon(1e-15));
  CHECK(d[1] == 0.0);
  // Hand evaluation of one row: j = 2, y = (0.2, 0.1, 0.05), b = 5.
  const auto e = kinetics::ode_rhs(std::vector<double>{0.2, 0.1, 0.05}, 5.0);
  CHECK(e[1] == doctest::Approx(-16 * 0.1 + 5 * 2 * 0.2 * (0.2 - 0.05)).epsilon(1e-15));
  CHECK(e[2] == doctest::Approx(-36 * 0.05 + 5 * 3 * 0.2 * (0.1 - 0.0)).epsilon(1e-15));
  CHECK(max_abs(kinetics::ode_rhs(branch_coeffs(8.0, 32), 8.0)) <= 1e-8);
  CHECK_THROWS_AS(kinetics::ode_rhs(std::vector<double>{0.1}, 1.0), InputError);
}

TEST_CASE("spectral integration: exact decay at b = 0") {
  const double tol = 1e-10;
  kinetics::SpectralOptions opts;
  opts.samples = 10;
  std::vector<double> y0(6, 0.0);
  y0[0] = 0.5;
  const auto traj = kinetics::integrate_spectral(y0, 0.0, 2.0, tol, opts);
  REQUIRE(traj.samples.size() == 11);
  for (const auto& s : traj.samples) {
    CHECK(std::abs(s.y[0] - 0.5 * std::exp(-4.0 * s.t)) <= 10 * tol);
  }
  CHECK(traj.samples.back().t == 2.0);
}

TEST_CASE("spectral integration: subcritical decay to the uniform state") {
  // Linear decay rate of y1 at b = 3 is 4 - b = 1, so an initial amplitude of
  // 1e-4 falls below 1e-6 by t = 5.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto traj = kinetics::integrate_spectral(small_random(32, seed, 1e-4), 3.0, 5.0, 1e-12);
    CHECK(norm2(traj.samples.back().y) < 1e-6);
  }
  const auto slow = kinetics::integrate_spectral(small_random(32, 9, 0.1), 3.0, 20.0, 1e-12);
  CHECK(norm2(slow.samples.back().y) < 1e-6);
}

TEST_CASE("spectral integration: relaxation onto the nematic branch") {
  std::vector<double> y0(32, 0.0);
  y0[0] = 0.1;
  const auto traj = kinetics::integrate_spectral(y0, 8.0, 40.0, 1e-11);
  const auto& y = traj.samples.back().y;
  CHECK(std::abs(y[0] - oracle::bessel_ratio(1, oracle::ms_root(8.0))) <= 1e-6);
  CHECK(traj.final_rhs_norm < 1e-9);

  SUBCASE("steady states solve the Onsager equation") {
    const std::size_t n = 256;
    CircleGrid grid(n);
    const auto f = FourierDensity{y}.reconstruct(grid);
    std::vector<double> F(n);
    for (std::size_t i = 0; i < n; ++i) F[i] = kTwoPi * f[i];
    const auto space = DiscreteCorpusSpace::circle(n);
    CHECK(onsager_residual(space, maier_saupe_kernel(), GridDensity::normalized(F, space.weights()), 8.0) < 1e-8);
  }
  SUBCASE("doubling the truncation does not move the equilibrium") {
    std::vector<double> y64(64, 0.0);
    y64[0] = 0.1;
    const auto t64 = kinetics::integrate_spectral(y64, 8.0, 40.0, 1e-11);
    for (std::size_t j = 0; j < 32; ++j) CHECK(std::abs(t64.samples.back().y[j] - y[j]) < 1e-10);
  }
  SUBCASE("sign structure along the transient (reported)") {
    bool nonneg = true;
    for (const auto& s : traj.samples) nonneg = nonneg && s.y[0] >= 0.0;
    const std::string verdict = nonneg ? "yes" : "no";
    MESSAGE("y1 stayed nonnegative along the b=8 transient: " << verdict);
  }
}

TEST_CASE("free energy and dissipation") {
  CHECK(kinetics::free_energy_spectral(std::vector<double>(8, 0.0), 5.0) ==
        doctest::Approx(std::log(1.0 / (2.0 * oracle::kPi))).epsilon(1e-13));
  CHECK(kinetics::dissipation_rate(std::vector<double>(8, 0.0), 5.0) == 0.0);

  const auto g = branch_coeffs(8.0, 32);
  CHECK(std::abs(kinetics::dissipation_rate(g, 8.0)) <= 1e-8);
  CHECK(kinetics::free_energy_spectral(g, 8.0) < kinetics::free_energy_spectral(std::vector<double>(32, 0.0), 8.0));

  // Against direct quadrature of the definitions with the oracle density.
  const double r = oracle::ms_root(8.0);
  const double Z = 2.0 * oracle::kPi * static_cast<double>(oracle::bessel_i(0, r));
  const double y1 = oracle::bessel_ratio(1, r);
  const double entropy = oracle::periodic_trapezoid(
      [&](long double t) {
        const long double f = std::exp(r * std::cos(2.0L * t)) / Z;
        return f * std::log(f);
      },
      4096);
  CHECK(kinetics::free_energy_spectral(g, 8.0) == doctest::Approx(entropy - 0.25 * 8.0 * y1 * y1).epsilon(1e-10));

  CHECK_THROWS_AS(kinetics::free_energy_spectral(std::vector<double>{1.0, 1.0, 1.0}, 1.0), InputError);
}

TEST_CASE("Lyapunov property along random trajectories") {
  for (double b : {3.0, 8.0}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto y0 = small_random(24, seed, 0.4);
      y0[0] = std::abs(y0[0]) + 0.05;
      kinetics::SpectralOptions opts;
      opts.samples = 200;
      const auto traj = kinetics::integrate_spectral(y0, b, 4.0, 1e-12, opts);
      double prev = kinetics::free_energy_spectral(traj.samples.front().y, b);
      for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        const double E = kinetics::free_energy_spectral(traj.samples[k].y, b);
        CHECK(E <= prev + 1e-9);
        prev = E;
      }
    }
  }
}

TEST_CASE("dissipation matches the time derivative of the free energy") {
  std::vector<double> y0(32, 0.0);
  y0[0] = 0.1;
  kinetics::SpectralOptions opts;
  opts.samples = 400;
  const double b = 8.0;
  const auto traj = kinetics::integrate_spectral(y0, b, 0.8, 1e-13, opts);
  const double dt = 0.8 / 400;
  int checked = 0;
  for (std::size_t k = 1; k + 1 < traj.samples.size(); k += 25) {
    const double dEdt = (kinetics::free_energy_spectral(traj.samples[k + 1].y, b) -
                         kinetics::free_energy_spectral(traj.samples[k - 1].y, b)) /
                        (2 * dt);
    const double D = kinetics::dissipation_rate(traj.samples[k].y, b);
    CHECK(D < 0.0);
    CHECK(std::abs(D - dEdt) <= 1e-3 * std::abs(D));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("grid PDE right-hand side") {
  CircleGrid grid(256);
  kinetics::PdeState uni{grid, std::vector<double>(256, 1.0 / kTwoPi), 8.0, 0.0};
  CHECK(max_abs(kinetics::pde_rhs(uni)) < 1e-14);

  const std::size_t J = 16;
  auto y = small_random(J, 3, 0.6);
  y[0] = 0.3;
  kinetics::PdeState s{grid, FourierDensity{y}.reconstruct(grid), 6.0, 0.0};
  const auto rhs = kinetics::pde_rhs(s);
  CHECK(std::abs(periodic_quadrature(rhs, grid)) < 1e-12);
  const auto proj = FourierDensity::project(rhs, grid, J);
  const auto ode = kinetics::ode_rhs(y, 6.0);
  for (std::size_t j = 0; j < J; ++j) CHECK(std::abs(proj.coeffs[j] - ode[j]) < 1e-8);
}

TEST_CASE("grid PDE integration") {
  CircleGrid grid(256);
  SUBCASE("uniform state is stationary") {
    kinetics::PdeState uni{grid, std::vector<double>(256, 1.0 / kTwoPi), 8.0, 0.0};
    const auto snaps = kinetics::integrate_pde(uni, 1.0, 1e-3);
    for (double v : snaps.back().f) CHECK(std::abs(v - 1.0 / kTwoPi) < 1e-14);
  }
  SUBCASE("relaxes to the Onsager density and conserves mass") {
    std::vector<double> y(8, 0.0);
    y[0] = 0.05;
    y[1] = 0.02;
    kinetics::PdeState s0{grid, FourierDensity{y}.reconstruct(grid), 8.0, 0.0};
    kinetics::PdeOptions opts;
    opts.samples = 20;
    const auto snaps = kinetics::integrate_pde(s0, 30.0, 2e-3, opts);
    double prevE = kinetics::free_energy_grid(snaps.front().f, grid, 8.0);
    for (const auto& s : snaps) {
      CHECK(std::abs(periodic_quadrature(s.f, grid) - 1.0) < 1e-8);
      const double E = kinetics::free_energy_grid(s.f, grid, 8.0);
      CHECK(E <= prevE + 1e-9);
      prevE = E;
    }
    const double r = oracle::ms_root(8.0);
    const double Z = 2.0 * oracle::kPi * static_cast<double>(oracle::bessel_i(0, r));
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      err = std::max(err, std::abs(snaps.back().f[i] - std::exp(r * std::cos(2.0 * grid.node(i))) / Z));
    }
    CHECK(err < 1e-4);
  }
  SUBCASE("agrees with the spectral solver") {
    std::vector<double> y(32, 0.0);
    y[0] = 0.1;
    y[1] = -0.03;
    y[2] = 0.01;
    kinetics::PdeState s0{grid, FourierDensity{y}.reconstruct(grid), 8.0, 0.0};
    const auto pde = kinetics::integrate_pde(s0, 1.0, 1e-3);
    const auto spec = kinetics::integrate_spectral(y, 8.0, 1.0, 1e-12);
    const auto fs = FourierDensity{spec.samples.back().y}.reconstruct(grid);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(fs[i] - pde.back().f[i]));
    CHECK(err <= 1e-4);
  }
  SUBCASE("step bound and bad input") {
    kinetics::PdeState s0{grid, std::vector<double>(256, 1.0 / kTwoPi), 8.0, 0.0};
    CHECK_THROWS_AS(kinetics::integrate_pde(s0, 1.0, 0.1), InputError);
    CHECK_THROWS_AS(kinetics::integrate_pde(s0, -1.0, 1e-3), InputError);
  }
}
