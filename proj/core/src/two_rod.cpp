#include "onsager/two_rod.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace onsager::two_rod {

namespace {

void require_positive_b(double b, const char* where) {
  if (!(b > 0.0) || !std::isfinite(b)) throw InputError(std::string(where) + ": b must be positive");
}

}  // namespace

TwoRodModel::TwoRodModel(std::size_t n) : grid_(n), sin_(n) {
  if (n % 4 != 0) throw InputError("TwoRodModel: grid size must be a multiple of 4");
  const std::size_t quarter = n / 4;
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i <= quarter; ++i) sin_[i] = std::sin(grid_.node(i));
  for (std::size_t i = quarter + 1; i < half; ++i) sin_[i] = sin_[half - i];
  for (std::size_t i = half; i < n; ++i) sin_[i] = -sin_[i - half];
}

std::vector<double> TwoRodModel::boltzmann(double b, double z) const {
  std::vector<double> w(sin_.size());
  double top = -INFINITY;
  for (std::size_t i = 0; i < sin_.size(); ++i) {
    const double d = sin_[i] - z;
    w[i] = -b * d * d;
    top = std::max(top, w[i]);
  }
  for (double& v : w) v = std::exp(v - top);
  return w;
}

double TwoRodModel::s_bracket(double b, double z) const {
  require_positive_b(b, "s_bracket");
  const auto w = boltzmann(b, z);
  const std::size_t half = sin_.size() / 2;
  double num = 0.0;
  double den = 0.0;
  // Pair theta with theta + pi so that [s](b, 0) cancels exactly.
  for (std::size_t i = 0; i < half; ++i) {
    num += (sin_[i] - z) * w[i] + (sin_[i + half] - z) * w[i + half];
    den += w[i] + w[i + half];
  }
  return num / den;
}

double TwoRodModel::lambda(double z, double tau) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InputError("lambda: tau must be positive");
  const double b = 1.0 / tau;
  double acc = 0.0;
  for (double s : sin_) {
    const double d = s - z;
    acc += std::exp(-b * d * d);
  }
  return std::sqrt(b) * acc * grid_.weight();
}

double TwoRodModel::dlambda_dz(double z, double tau) const {
  const double h = std::min(1e-5, std::max(1e-12, (1.0 - std::abs(z)) / 10.0));
  return (lambda(z + h, tau) - lambda(z - h, tau)) / (2.0 * h);
}

double TwoRodModel::heat_residual(double z, double tau, double h_z, double h_tau) const {
  if (!(h_z > 0.0) || !(h_tau > 0.0)) throw InputError("heat_residual: steps must be positive");
  if (!(z > -1.0 + 2.0 * h_z && z < 1.0 - 2.0 * h_z) || !(tau > h_tau)) {
    throw InputError("heat_residual: stencil leaves the domain");
  }
  const double dtau = (lambda(z, tau + h_tau) - lambda(z, tau - h_tau)) / (2.0 * h_tau);
  const double dzz = (lambda(z + h_z, tau) - 2.0 * lambda(z, tau) + lambda(z - h_z, tau)) / (h_z * h_z);
  return dtau - 0.25 * dzz;
}

std::vector<double> TwoRodModel::solve_z(double b) const {
  require_positive_b(b, "solve_z");
  std::vector<double> zs;
  constexpr int kScan = 2000;
  for (int k = 1; k <= kScan; ++k) zs.push_back(kZCap * k / kScan);
  // Resolve the O(b^{-1/2}) layer below z = 1.
  const double layer = 1.0 / std::sqrt(b);
  const double fine = std::min(1e-3, layer / 10.0);
  for (double z = std::max(0.0, 1.0 - 10.0 * layer); z < kZCap; z += fine) {
    if (z > 0.0) zs.push_back(z);
  }
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end(), [](double x, double y) { return std::abs(x - y) < 1e-13; }),
           zs.end());

  std::vector<double> roots{0.0};
  double z_prev = zs.front();
  double s_prev = s_bracket(b, z_prev);
  for (std::size_t k = 1; k < zs.size(); ++k) {
    const double z = zs[k];
    const double sz = s_bracket(b, z);
    if ((s_prev > 0.0 && sz <= 0.0) || (s_prev < 0.0 && sz >= 0.0)) {
      double lo = z_prev;
      double hi = z;
      double flo = s_prev;
      while (hi - lo > kRootTolerance) {
        const double mid = 0.5 * (lo + hi);
        const double fm = s_bracket(b, mid);
        if ((fm > 0.0) == (flo > 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    z_prev = z;
    s_prev = sz;
  }
  return roots;
}

GridDensity TwoRodModel::density(double b, double z) const {
  require_positive_b(b, "two_rod density");
  return GridDensity::normalized(boltzmann(b, z), grid_.weights());
}

double TwoRodModel::gamma_of(double b, double z) const {
  const GridDensity g = density(b, z);
  double acc = 0.0;
  for (std::size_t i = 0; i < sin_.size(); ++i) acc += sin_[i] * sin_[i] * g[i];
  return acc * grid_.weight();
}

double TwoRodModel::mean_sin(double b, double z) const {
  const GridDensity g = density(b, z);
  double acc = 0.0;
  for (std::size_t i = 0; i < sin_.size(); ++i) acc += sin_[i] * g[i];
  return acc * grid_.weight();
}

double TwoRodModel::energy(double b, double z) const {
  // theta = p1 - p2 is uniformly distributed under the product measure, so
  // the composite density F = 2pi g(theta) reduces to theta nodes of weight
  // 1/n, and U(theta) = sin^2 theta - 2 [sin] sin theta + [sin^2].
  const GridDensity g = density(b, z);
  const std::size_t n = sin_.size();
  double zbar = 0.0;
  double gamma = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zbar += sin_[i] * g[i];
    gamma += sin_[i] * sin_[i] * g[i];
  }
  zbar *= grid_.weight();
  gamma *= grid_.weight();
  std::vector<double> F(n);
  std::vector<double> U(n);
  for (std::size_t i = 0; i < n; ++i) {
    F[i] = kTwoPi * g[i];
    U[i] = sin_[i] * sin_[i] - 2.0 * zbar * sin_[i] + gamma;
  }
  const GridDensity composite = GridDensity::normalized(std::move(F), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  return free_energy_from_potential(composite, U, b);
}

std::vector<TwoRodSolution> TwoRodModel::solve(double b) const {
  std::vector<TwoRodSolution> out;
  for (double z : solve_z(b)) {
    out.push_back({b, z, gamma_of(b, z), energy(b, z), density(b, z)});
  }
  return out;
}

double TwoRodModel::product_residual(double b, double z) const {
  const std::size_t n = sin_.size();
  if (n > 256) throw InputError("product_residual: grid too large for the O(n^4) check");
  const GridDensity g = density(b, z);
  const std::size_t N = n * n;
  std::vector<double> F(N);
  std::vector<std::size_t> diff(N);
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const std::size_t d = (i1 + n - i2) % n;
      diff[i1 * n + i2] = d;
      F[i1 * n + i2] = kTwoPi * g[d];
    }
  }
  const GridDensity composite =
      GridDensity::normalized(std::move(F), std::vector<double>(N, 1.0 / static_cast<double>(N)));
  const auto U = potential_pairwise(composite, [&](std::size_t a, std::size_t c) {
    const double d = sin_[diff[a]] - sin_[diff[c]];
    return d * d;
  });
  return onsager_residual_from_potential(composite, U, b);
}

}  // namespace onsager::two_rod
