#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

/// I_n(x) by its power series, summed in long double until terms vanish.
inline long double bessel_i(int n, long double x) {
  long double term = 1.0L;
  for (int k = 1; k <= n; ++k) term *= (x / 2.0L) / static_cast<long double>(k);
  long double sum = term;
  const long double q = x * x / 4.0L;
  for (int k = 1; k < 2000; ++k) {
    term *= q / (static_cast<long double>(k) * static_cast<long double>(k + n));
    sum += term;
    if (term < sum * 1e-21L) break;
  }
  return sum;
}

/// g_j(r) = I_j(r) / I_0(r).
inline double bessel_ratio(int j, double r) {
  return static_cast<double>(bessel_i(j, std::abs(r)) / bessel_i(0, std::abs(r))) * ((r < 0 && j % 2) ? -1.0 : 1.0);
}

/// Trapezoid rule with n nodes on [0, 2 pi), in long double.
inline double periodic_trapezoid(const std::function<long double(long double)>& f, std::size_t n) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) acc += f(2.0L * std::numbers::pi_v<long double> * i / n);
  return static_cast<double>(acc * 2.0L * std::numbers::pi_v<long double> / n);
}

/// Root of a sign-changing function on [lo, hi] by plain bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
  double flo = f(lo);
  for (int it = 0; it < 300 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Maier-Saupe order parameter from the Bessel-ratio oracle: positive root
/// of I_1(r)/I_0(r) = 2r/b for b > 4.
inline double ms_root(double b) {
  return bisect([b](double r) { return bessel_ratio(1, r) - 2.0 * r / b; }, 1e-9, b / 2.0);
}

/// Two-rod bracket [s](b, z) by a long-double trapezoid with n nodes.
inline double two_rod_bracket(double b, double z, std::size_t n) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double th = 2.0L * std::numbers::pi_v<long double> * i / n;
    const long double s = std::sin(th) - z;
    const long double w = std::exp(-b * s * s);
    num += s * w;
    den += w;
  }
  return static_cast<double>(num / den);
}

/// Random finite metric space: planar points with Euclidean distance and
/// random positive weights. Returns (dist row-major, weights).
struct RandomSpace {
  std::vector<double> dist;
  std::vector<double> mu;
};

inline RandomSpace random_space(std::size_t m, std::uint64_t seed, bool uniform_weights = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = unit(rng);
    y[i] = unit(rng);
  }
  RandomSpace s;
  s.dist.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) s.dist[i * m + j] = std::hypot(x[i] - x[j], y[i] - y[j]);
  }
  s.mu.assign(m, 1.0 / static_cast<double>(m));
  if (!uniform_weights) {
    double total = 0.0;
    for (auto& w : s.mu) total += (w = 0.5 + unit(rng));
    for (auto& w : s.mu) w /= total;
  }
  return s;
}

/// Free energy sum_i (log f_i + b/2 U_i) f_i mu_i for a distance kernel u,
/// written out from the definition.
inline double free_energy(const std::vector<double>& dist, const std::vector<double>& mu,
                          const std::function<double(double)>& u, const std::vector<double>& f, double b) {
  const std::size_t m = mu.size();
  double E = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (f[i] <= 0.0) continue;
    double U = 0.0;
    for (std::size_t j = 0; j < m; ++j) U += u(dist[i * m + j]) * f[j] * mu[j];
    E += (std::log(f[i]) + 0.5 * b * U) * f[i] * mu[i];
  }
  return E;
}

/// Minimum of the free energy over the probability simplex on a grid of
/// step 1/steps in p_i = f_i mu_i, by exhaustive enumeration.
inline double simplex_grid_minimum(const std::vector<double>& dist, const std::vector<double>& mu,
                                   const std::function<double(double)>& u, double b, int steps) {
  const std::size_t m = mu.size();
  std::vector<double> kmat(m * m);
  for (std::size_t k = 0; k < m * m; ++k) kmat[k] = u(dist[k]);
  std::vector<int> c(m, 0);
  std::vector<double> p(m);
  double best = std::numeric_limits<double>::infinity();
  // Enumerate compositions of `steps` into m nonnegative parts.
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == m) {
      c[i] = left;
      double E = 0.0;
      for (std::size_t a = 0; a < m; ++a) p[a] = static_cast<double>(c[a]) / steps;
      for (std::size_t a = 0; a < m; ++a) {
        if (p[a] <= 0.0) continue;
        double U = 0.0;
        for (std::size_t d = 0; d < m; ++d) U += kmat[a * m + d] * p[d];
        E += p[a] * (std::log(p[a] / mu[a]) + 0.5 * b * U);
      }
      if (E < best) best = E;
      return;
    }
    for (int k = 0; k <= left; ++k) {
      c[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, steps);
  return best;
}

}  // namespace oracle
