#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "onsager/core.hpp"
#include "onsager/corpus_solver.hpp"
#include "onsager/kinetics.hpp"
#include "onsager/maier_saupe.hpp"
#include "onsager/two_rod.hpp"

using namespace onsager;

static void BM_GCoeffs(benchmark::State& state) {
  const auto J = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ms::g_coeffs(5.0, J));
}
BENCHMARK(BM_GCoeffs)->Arg(8)->Arg(64)->Arg(512);

static void BM_GCoeffsQuadrature(benchmark::State& state) {
  const auto J = static_cast<std::size_t>(state.range(0));
  const CircleGrid grid(256);
  for (auto _ : state) benchmark::DoNotOptimize(ms::g_coeffs_quadrature(5.0, J, grid));
}
BENCHMARK(BM_GCoeffsQuadrature)->Arg(8)->Arg(64);

static void BM_NematicRoot(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ms::nematic_r(16.0));
}
BENCHMARK(BM_NematicRoot);

static void BM_BranchContinuation(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ms::branch_continuation(4.1, 100.0, 200, 16));
}
BENCHMARK(BM_BranchContinuation);

static void BM_SpectralRelaxation(benchmark::State& state) {
  std::vector<double> y0(static_cast<std::size_t>(state.range(0)), 0.0);
  y0[0] = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(kinetics::integrate_spectral(y0, 8.0, 20.0, 1e-10));
}
BENCHMARK(BM_SpectralRelaxation)->Arg(16)->Arg(32)->Arg(64);

static void BM_PdeRhs(benchmark::State& state) {
  const CircleGrid grid(static_cast<std::size_t>(state.range(0)));
  std::vector<double> y(8, 0.0);
  y[0] = 0.2;
  const kinetics::PdeState s{grid, FourierDensity{y}.reconstruct(grid), 8.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(kinetics::pde_rhs(s));
}
BENCHMARK(BM_PdeRhs)->Arg(256)->Arg(1024);

static void BM_TwoRodSolve(benchmark::State& state) {
  const two_rod::TwoRodModel model(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model.solve_z(200.0));
}
BENCHMARK(BM_TwoRodSolve)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_CorpusFixedPoint(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const corpus::CorpusProblem p(DiscreteCorpusSpace::circle(n), maier_saupe_kernel(), 8.0);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.2 * std::cos(2.0 * kTwoPi * static_cast<double>(i) / n);
  corpus::FixedPointOptions opt;
  opt.f_init = GridDensity::normalized(v, p.space().weights());
  for (auto _ : state) benchmark::DoNotOptimize(corpus::fixed_point_solve(p, opt));
}
BENCHMARK(BM_CorpusFixedPoint)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_CorpusMinimize(benchmark::State& state) {
  const auto anderson = static_cast<std::size_t>(state.range(0));
  const corpus::CorpusProblem p(DiscreteCorpusSpace::circle(128), onsager_abs_sin_kernel(), 40.0);
  corpus::MinimizeOptions opt;
  opt.anderson_depth = anderson;
  opt.tol = 1e-10;
  for (auto _ : state) benchmark::DoNotOptimize(corpus::minimize_energy(p, opt));
}
BENCHMARK(BM_CorpusMinimize)->Arg(0)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
