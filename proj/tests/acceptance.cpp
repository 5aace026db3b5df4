// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "onsager/core.hpp"
#include "onsager/corpus_solver.hpp"
#include "onsager/kinetics.hpp"
#include "onsager/maier_saupe.hpp"
#include "onsager/two_rod.hpp"
#include "oracles.hpp"

using namespace onsager;

namespace {

// Collects sub-checks of one criterion; the first failures are kept for the report.
class Verdict {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok) {
      ++failed_;
      if (failures_.size() < 3) failures_.push_back(what);
    }
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream out;
    out << (total_ - failed_) << "/" << total_ << " checks";
    for (const auto& n : notes_) out << "; " << n;
    for (const auto& f : failures_) out << "; failed: " << f;
    return out.str();
  }

 private:
  int total_ = 0, failed_ = 0;
  std::vector<std::string> failures_, notes_;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<double> small_random(std::size_t J, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xi(-1.0, 1.0);
  std::vector<double> y(J);
  for (std::size_t j = 0; j < J; ++j) y[j] = amplitude * xi(rng) / static_cast<double>((j + 1) * (j + 1));
  return y;
}

GridDensity cos2_init(const DiscreteCorpusSpace& space, double amplitude) {
  const std::size_t n = space.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + amplitude * std::cos(2.0 * kTwoPi * static_cast<double>(i) / n);
  return GridDensity::normalized(std::move(v), space.weights());
}

void criterion1(Verdict& v) {
  for (double b : {1.0, 3.0, 3.99}) v.expect(ms::solve_r_of_b(b).size() == 1, "one root at b=" + fmt("%g", b));
  for (double b : {4.01, 5.0, 10.0, 100.0}) v.expect(ms::solve_r_of_b(b).size() == 2, "two roots at b=" + fmt("%g", b));
  const double b0 = ms::b_of_r(1e-4);
  v.expect(std::abs(b0 - 4.0) <= 1e-3, "b_of_r(1e-4)=" + fmt("%.8g", b0));
  v.note("b_of_r(1e-4)=" + fmt("%.10g", b0));
}

void criterion2(Verdict& v) {
  double worst = 0.0;
  for (double b : {5.0, 6.0, 8.0, 16.0, 64.0}) {
    const double r = ms::nematic_r(b);
    const double err = std::abs(ms::g_coeffs(r, 2)[1] - (1.0 - 4.0 / b));
    worst = std::max(worst, err);
    v.expect(err <= 1e-8, "g2 identity at b=" + fmt("%g", b));
  }
  v.note("max |g2 - (1-4/b)| = " + fmt("%.2e", worst));
}

void criterion3(Verdict& v) {
  double worst = 0.0;
  for (double r : {0.5, 1.0, 2.0, 5.0}) {
    const double h = 1e-5 * r;
    const double fd = (ms::b_of_r(r + h) - ms::b_of_r(r - h)) / (2 * h);
    const double an = ms::db_dr(r);
    const double rel = std::abs(an - fd) / std::abs(fd);
    worst = std::max(worst, rel);
    v.expect(rel <= 1e-4 && an > 0 && fd > 0, "db/dr at r=" + fmt("%g", r));
  }
  v.note("max relative FD gap " + fmt("%.2e", worst));
}

void criterion4(Verdict& v) {
  for (double r : {0.5, 2.0, 10.0}) {
    const auto g = ms::g_coeffs(r, 32);
    bool ok = g[0] > 0 && g[0] < 1;
    for (std::size_t j = 0; j + 1 < g.size(); ++j) ok = ok && g[j + 1] > 0 && g[j + 1] < g[j];
    v.expect(ok, "ordering at r=" + fmt("%g", r));
  }
}

void criterion5(Verdict& v) {
  const double m = ms::zero_temp_mass(200.0, 0.15);
  v.expect(m >= 0.99, "mass " + fmt("%.6f", m));
  v.note("mass within 0.15 of {0, pi} at b=200: " + fmt("%.6f", m));
}

void criterion6(Verdict& v) {
  double worst_rise = -1e300;
  for (double b : {3.0, 8.0}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      // sum |y_j| < 1/2 keeps the initial density positive
      auto y0 = small_random(32, 100 + seed, 0.25);
      y0[0] = std::abs(y0[0]) + 0.05;
      kinetics::SpectralOptions opts;
      opts.samples = 200;
      const auto traj = kinetics::integrate_spectral(y0, b, 4.0, 1e-12, opts);
      double prev = kinetics::free_energy_spectral(traj.samples.front().y, b);
      bool mono = true;
      for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        const double E = kinetics::free_energy_spectral(traj.samples[k].y, b);
        worst_rise = std::max(worst_rise, E - prev);
        mono = mono && E <= prev + 1e-9;
        prev = E;
      }
      v.expect(mono, "monotone E, b=" + fmt("%g", b) + " seed " + std::to_string(seed));
    }
  }
  v.note("largest per-step change of E " + fmt("%.2e", worst_rise));

  // dissipation vs dE/dt away from equilibrium
  std::vector<double> y0(32, 0.0);
  y0[0] = 0.1;
  kinetics::SpectralOptions opts;
  opts.samples = 400;
  const double b = 8.0, t_end = 0.8, dt = t_end / 400;
  const auto traj = kinetics::integrate_spectral(y0, b, t_end, 1e-13, opts);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.samples.size(); k += 10) {
    const double dEdt = (kinetics::free_energy_spectral(traj.samples[k + 1].y, b) -
                         kinetics::free_energy_spectral(traj.samples[k - 1].y, b)) /
                        (2 * dt);
    const double D = kinetics::dissipation_rate(traj.samples[k].y, b);
    const double rel = std::abs(D - dEdt) / std::abs(D);
    worst = std::max(worst, rel);
    v.expect(rel <= 1e-3, "dissipation at t=" + fmt("%g", traj.samples[k].t));
  }
  v.note("max relative dissipation gap " + fmt("%.2e", worst));
}

void criterion7(Verdict& v) {
  std::vector<double> y0(32, 0.0);
  y0[0] = 0.1;
  const auto t8 = kinetics::integrate_spectral(y0, 8.0, 40.0, 1e-11);
  const double gap = std::abs(t8.samples.back().y[0] - ms::g1(ms::nematic_r(8.0)));
  v.expect(gap <= 1e-6, "b=8 |y1 - g1| = " + fmt("%.2e", gap));
  const auto t3 = kinetics::integrate_spectral(y0, 3.0, 20.0, 1e-11);
  double norm = 0.0;
  for (double y : t3.samples.back().y) norm += y * y;
  norm = std::sqrt(norm);
  v.expect(norm <= 1e-6, "b=3 ||y|| = " + fmt("%.2e", norm));
  v.note("b=8 gap " + fmt("%.2e", gap) + ", b=3 norm " + fmt("%.2e", norm));
}

void criterion8(Verdict& v) {
  const CircleGrid grid(256);
  std::vector<double> y(32, 0.0);
  y[0] = 0.1;
  y[1] = -0.03;
  y[2] = 0.01;
  const kinetics::PdeState s0{grid, FourierDensity{y}.reconstruct(grid), 8.0, 0.0};
  const auto pde = kinetics::integrate_pde(s0, 1.0, 1e-3);
  const auto spec = kinetics::integrate_spectral(y, 8.0, 1.0, 1e-12);
  const auto fs = FourierDensity{spec.samples.back().y}.reconstruct(grid);
  double err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(fs[i] - pde.back().f[i]));
  v.expect(err <= 1e-4, "L-inf gap " + fmt("%.2e", err));
  v.note("L-inf gap at t=1: " + fmt("%.2e", err));
}

void criterion9(Verdict& v) {
  const two_rod::TwoRodModel m;
  for (double b : {1.0, 10.0, 100.0}) v.expect(std::abs(m.s_bracket(b, 0.0)) <= 1e-14, "[s](b,0) at b=" + fmt("%g", b));
  double worst = 0.0;
  for (double b : {2.0, 6.0, 20.0, 60.0, 150.0}) {
    for (double z : {0.05, 0.3, 0.55, 0.8, 0.95}) {
      const double d = std::abs(m.s_bracket(b, z) - m.dlambda_dz(z, 1 / b) / (2 * b * m.lambda(z, 1 / b)));
      worst = std::max(worst, d);
      v.expect(d <= 1e-9, "log-derivative identity at b=" + fmt("%g", b) + " z=" + fmt("%g", z));
    }
  }
  for (double z : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double limit = 2 * std::sqrt(kPi) / std::sqrt(1 - z * z);
    v.expect(std::abs(m.lambda(z, 1e-4) - limit) <= 0.01 * limit, "small-tau lambda at z=" + fmt("%g", z));
  }
  const double ra = m.heat_residual(0.3, 0.2, 4e-2, 4e-2);
  const double rb = m.heat_residual(0.3, 0.2, 2e-2, 2e-2);
  v.expect(std::abs(ra / rb - 4.0) <= 0.8, "heat residual ratio " + fmt("%.3f", ra / rb));
  v.note("identity gap " + fmt("%.2e", worst) + ", heat ratio " + fmt("%.3f", ra / rb));
}

void criterion10(Verdict& v) {
  const two_rod::TwoRodModel m;
  std::vector<double> zb;
  for (double b : {10.0, 50.0, 200.0}) {
    const auto roots = m.solve_z(b);
    zb.push_back(*std::max_element(roots.begin(), roots.end()));
  }
  v.expect(zb[2] > 0.9 && zb[2] < 1.0, "z_200 in (0.9, 1)");
  v.expect(zb[0] < zb[1] && zb[1] < zb[2], "z_b increasing");
  const auto g = m.density(200.0, zb[2]);
  const std::vector<double> right{kPi / 2, 3 * kPi / 2};
  const double mass = mass_within(g, m.grid(), right, 0.15);
  v.expect(mass >= 0.99, "mass within 0.15 of +-pi/2 = " + fmt("%.4f", mass));
  v.note("z_b = " + fmt("%.6f", zb[0]) + ", " + fmt("%.6f", zb[1]) + ", " + fmt("%.6f", zb[2]) +
         "; mass near right angles at b=200: " + fmt("%.4f", mass) + ", gamma " +
         fmt("%.4f", m.gamma_of(200.0, zb[2])));
}

void criterion11(Verdict& v) {
  const auto circle = DiscreteCorpusSpace::circle(128);
  const std::vector<KernelSpec> kernels{maier_saupe_kernel(),        onsager_abs_sin_kernel(),
                                        distance_power_kernel(1, kPi), distance_power_kernel(2, kPi),
                                        gaussian_well_kernel(0.5),     zero_kernel()};
  double worst = 0.0;
  for (const auto& k : kernels) {
    for (double b : {0.0, 1.0, 5.0, 20.0, 100.0}) {
      const double r = corpus::uniform_solution_residual(corpus::CorpusProblem(circle, k, b));
      worst = std::max(worst, r);
      v.expect(r <= 1e-12, "uniform residual for " + k.name);
    }
  }
  for (const auto& k : {maier_saupe_kernel(), onsager_abs_sin_kernel()}) {
    const corpus::CorpusProblem p(circle, k, 20.0);
    const auto r = corpus::minimize_energy(p);
    const double Eu = p.free_energy(p.uniform());
    v.expect(r.converged && r.energy < Eu, k.name + ": E_min < E[1]");
    v.note(k.name + " E_min=" + fmt("%.6f", r.energy) + " E[1]=" + fmt("%.6f", Eu));
  }
  v.note("max uniform residual " + fmt("%.2e", worst));
}

void criterion12(Verdict& v) {
  const corpus::CorpusProblem base(DiscreteCorpusSpace::circle(512), onsager_abs_sin_kernel(), 1.0);
  std::vector<double> ball, flat;
  for (double b : {10.0, 100.0, 1000.0}) {
    const auto p = base.with_b(b);
    ball.push_back(corpus::best_ball_energy(p, 1.0 / b) / b);
    flat.push_back(p.free_energy(p.uniform()) / b);
  }
  v.expect(ball[0] > ball[1] && ball[1] > ball[2], "ball E/b decreasing");
  v.expect(std::abs(flat[1] - flat[0]) <= 1e-12 && std::abs(flat[2] - flat[0]) <= 1e-12, "E[1]/b constant");
  v.note("ball E/b = " + fmt("%.5f", ball[0]) + ", " + fmt("%.5f", ball[1]) + ", " + fmt("%.5f", ball[2]) +
         "; E[1]/b = " + fmt("%.12f", flat[0]));
}

void criterion13(Verdict& v) {
  const auto circle = DiscreteCorpusSpace::circle(32);
  const corpus::CorpusProblem p(circle, maier_saupe_kernel(), 8.0);
  corpus::FixedPointOptions fo;
  fo.tol = 1e-12;
  fo.f_init = cos2_init(circle, 0.2);
  const auto r = corpus::fixed_point_solve(p, fo);
  v.expect(r.converged, "component converged");
  const auto prod = corpus::product_space({circle, circle});
  const std::vector<corpus::SolveReport> reports{r, r};
  const auto f = corpus::product_compose(prod, std::span<const corpus::SolveReport>(reports));
  const std::vector<KernelSpec> ks{maier_saupe_kernel(), maier_saupe_kernel()};
  const double res = corpus::product_onsager_residual(prod, ks, f, 8.0);
  v.expect(res <= 1e-8, "composite residual " + fmt("%.2e", res));
  double gap = 0.0;
  for (std::size_t j = 0; j < 2; ++j) gap = std::max(gap, prod.marginal(f, j).max_abs_difference(r.density));
  v.expect(gap <= 1e-10, "marginal gap " + fmt("%.2e", gap));
  v.note("composite residual " + fmt("%.2e", res) + ", marginal gap " + fmt("%.2e", gap));
}

void criterion14(Verdict& v) {
  double worst = -1e300;
  for (std::uint64_t seed : {41u, 42u, 43u}) {
    const std::size_t m = 4 + seed % 3;
    const auto s = oracle::random_space(m, seed);
    const DiscreteCorpusSpace space(s.dist, s.mu);
    const auto kernel = distance_power_kernel(1.0, space.diameter());
    for (double b : {5.0, 40.0}) {
      const corpus::CorpusProblem p(space, kernel, b);
      corpus::MinimizeOptions mo;
      mo.restarts = 4;
      mo.concentrated_starts = m;
      const auto r = corpus::minimize_energy(p, mo);
      const double grid = oracle::simplex_grid_minimum(s.dist, s.mu, kernel.profile, b, 50);
      worst = std::max(worst, r.energy - grid);
      v.expect(r.converged && grid >= r.energy - 1e-2,
               "m=" + std::to_string(m) + " b=" + fmt("%g", b) + " grid below by " + fmt("%.2e", r.energy - grid));
    }
  }
  v.note("largest E_min - E_grid " + fmt("%.2e", worst));
}

void criterion15(Verdict& v) {
  const double tol = 1e-10;
  double dens = 0.0, shift = 0.0;
  auto check = [&](const corpus::CorpusProblem& p, const corpus::FixedPointOptions& fo) {
    const corpus::CorpusProblem q(p.space(), p.kernel().shifted(1.0), p.b());
    const auto a = corpus::fixed_point_solve(p, fo);
    const auto c = corpus::fixed_point_solve(q, fo);
    v.expect(a.converged && c.converged, "converged");
    const double d = a.density.max_abs_difference(c.density);
    const double e = std::abs((c.energy - a.energy) - p.b() / 2);
    dens = std::max(dens, d);
    shift = std::max(shift, e);
    v.expect(d <= tol, "density moved by " + fmt("%.2e", d));
    v.expect(e <= 1e-10, "energy shift off by " + fmt("%.2e", e));
  };
  for (std::uint64_t seed : {51u, 52u}) {
    const auto s = oracle::random_space(12, seed);
    const DiscreteCorpusSpace space(s.dist, s.mu);
    for (double b : {3.0, 12.0}) {
      corpus::FixedPointOptions fo;
      fo.tol = tol;
      check(corpus::CorpusProblem(space, distance_power_kernel(1.0, space.diameter()), b), fo);
    }
  }
  const auto circle = DiscreteCorpusSpace::circle(128);
  corpus::FixedPointOptions fo;
  fo.tol = tol;
  fo.f_init = cos2_init(circle, 0.2);
  check(corpus::CorpusProblem(circle, maier_saupe_kernel(), 8.0), fo);
  v.note("max density change " + fmt("%.2e", dens) + ", max energy-shift error " + fmt("%.2e", shift));
}

}  // namespace

int main() {
  const std::vector<std::function<void(Verdict&)>> criteria{
      criterion1,  criterion2,  criterion3,  criterion4,  criterion5,  criterion6,  criterion7, criterion8,
      criterion9,  criterion10, criterion11, criterion12, criterion13, criterion14, criterion15};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[k](v);
    } catch (const std::exception& e) {
      v.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.ok()) ++failed;
    std::printf("%s criterion %zu: %s (%.2fs)\n", v.ok() ? "PASS" : "FAIL", k + 1, v.summary().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
