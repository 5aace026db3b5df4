#include "onsager/core.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace onsager {

namespace {

std::string describe_index(std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << '(' << i << ", " << j << ')';
  return os.str();
}

double weighted_sum(std::span<const double> values, std::span<const double> weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * weights[i];
  return acc;
}

}  // namespace

CircleGrid::CircleGrid(std::size_t n) {
  if (n < 4) throw InputError("CircleGrid: need at least 4 nodes");
  nodes_.resize(n);
  const double h = kTwoPi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) nodes_[i] = h * static_cast<double>(i);
}

std::vector<double> CircleGrid::weights() const { return std::vector<double>(size(), weight()); }

double periodic_quadrature(std::span<const double> values, const CircleGrid& grid) {
  if (values.size() != grid.size()) {
    throw InputError("periodic_quadrature: values length does not match grid size");
  }
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * grid.weight();
}

GridDensity::GridDensity(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (values_.size() != weights_.size() || values_.empty()) {
    throw InputError("GridDensity: values and weights must be nonempty and of equal length");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("GridDensity: negative or non-finite value");
  }
  if (std::abs(mass() - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os << "GridDensity: not normalized (mass " << mass() << ")";
    throw InputError(os.str());
  }
}

GridDensity GridDensity::uniform(std::vector<double> weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InputError("GridDensity::uniform: weights must have positive total");
  std::vector<double> values(weights.size(), 1.0 / total);
  return GridDensity(std::move(values), std::move(weights));
}

GridDensity GridDensity::normalized(std::vector<double> values, std::vector<double> weights) {
  if (values.size() != weights.size()) throw InputError("GridDensity::normalized: length mismatch");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InputError("GridDensity::normalized: negative or non-finite value");
    }
  }
  const double m = weighted_sum(values, weights);
  if (!(m > 0.0)) throw InputError("GridDensity::normalized: zero mass");
  for (double& v : values) v /= m;
  return GridDensity(std::move(values), std::move(weights));
}

double GridDensity::mass() const { return weighted_sum(values_, weights_); }

double GridDensity::max_abs_difference(const GridDensity& other) const {
  if (other.size() != size()) throw InputError("GridDensity: size mismatch");
  double out = 0.0;
  for (std::size_t i = 0; i < size(); ++i) out = std::max(out, std::abs(values_[i] - other.values_[i]));
  return out;
}

std::vector<double> FourierDensity::reconstruct(const CircleGrid& grid) const {
  std::vector<double> out(grid.size(), 1.0 / kTwoPi);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double theta = grid.node(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      acc += coeffs[j] * std::cos(2.0 * static_cast<double>(j + 1) * theta);
    }
    out[i] += acc / kPi;
  }
  return out;
}

FourierDensity FourierDensity::project(std::span<const double> values, const CircleGrid& grid,
                                       std::size_t modes) {
  if (values.size() != grid.size()) throw InputError("FourierDensity::project: length mismatch");
  FourierDensity out;
  out.coeffs.resize(modes);
  std::vector<double> tmp(grid.size());
  for (std::size_t j = 1; j <= modes; ++j) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      tmp[i] = values[i] * std::cos(2.0 * static_cast<double>(j) * grid.node(i));
    }
    out.coeffs[j - 1] = periodic_quadrature(tmp, grid);
  }
  return out;
}

double angular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

double mass_within(const GridDensity& f, const CircleGrid& grid, std::span<const double> centers,
                   double halfwidth) {
  if (f.size() != grid.size()) throw InputError("mass_within: density does not live on this grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool inside = std::any_of(centers.begin(), centers.end(), [&](double c) {
      return angular_distance(grid.node(i), c) <= halfwidth + 1e-14;
    });
    if (inside) acc += f[i] * f.weights()[i];
  }
  return acc;
}

DiscreteCorpusSpace::DiscreteCorpusSpace(std::vector<double> dist, std::vector<double> mu,
                                         std::vector<std::string> labels, TriangleCheck check)
    : dist_(std::move(dist)), mu_(std::move(mu)), labels_(std::move(labels)) {
  const std::size_t m = mu_.size();
  if (m == 0) throw InputError("DiscreteCorpusSpace: empty space");
  if (dist_.size() != m * m) throw InputError("DiscreteCorpusSpace: distance matrix is not m x m");
  if (!labels_.empty() && labels_.size() != m) {
    throw InputError("DiscreteCorpusSpace: label count does not match point count");
  }
  double total = 0.0;
  for (double w : mu_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InputError("DiscreteCorpusSpace: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "DiscreteCorpusSpace: weights sum to " << total << ", expected 1";
    throw InputError(os.str());
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (distance(i, i) != 0.0) throw InputError("DiscreteCorpusSpace: nonzero diagonal at " + describe_index(i, i));
    for (std::size_t j = 0; j < m; ++j) {
      const double d = distance(i, j);
      if (!(d >= 0.0) || !std::isfinite(d)) {
        throw InputError("DiscreteCorpusSpace: negative or non-finite distance at " + describe_index(i, j));
      }
      if (d != distance(j, i)) throw InputError("DiscreteCorpusSpace: asymmetric distance at " + describe_index(i, j));
    }
  }
  if (check == TriangleCheck::always || (check == TriangleCheck::automatic && m <= kTriangleCheckLimit)) {
    check_triangle_inequality();
  }
}

DiscreteCorpusSpace DiscreteCorpusSpace::circle(std::size_t n) {
  if (n < 2) throw InputError("DiscreteCorpusSpace::circle: need n >= 2");
  const double h = kTwoPi / static_cast<double>(n);
  std::vector<double> arc(n);
  for (std::size_t k = 0; k < n; ++k) arc[k] = h * static_cast<double>(std::min(k, n - k));
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = arc[i > j ? i - j : j - i];
  }
  std::vector<double> mu(n, 1.0 / static_cast<double>(n));
  return DiscreteCorpusSpace(std::move(dist), std::move(mu), {}, TriangleCheck::never);
}

double DiscreteCorpusSpace::diameter() const { return *std::max_element(dist_.begin(), dist_.end()); }

void DiscreteCorpusSpace::check_triangle_inequality(double tol) const {
  const std::size_t m = size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double dij = distance(i, j);
      for (std::size_t k = 0; k < m; ++k) {
        if (distance(i, k) > dij + distance(j, k) + tol) {
          throw InputError("DiscreteCorpusSpace: triangle inequality fails for " +
                           describe_index(i, k) + " via " + std::to_string(j));
        }
      }
    }
  }
}

KernelSpec KernelSpec::shifted(double c) const {
  KernelSpec out = *this;
  out.shift += c;
  return out;
}

void KernelSpec::check_conformity(std::vector<double> samples, double tol) const {
  if (!profile) throw InputError("kernel " + name + ": no profile function");
  if (std::abs(profile(0.0)) > tol) throw InputError("kernel " + name + ": u(0) != 0");
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  double prev_d = 0.0;
  double prev_u = profile(0.0);
  for (double d : samples) {
    if (d < 0.0) throw InputError("kernel " + name + ": negative distance sample");
    const double u = profile(d);
    if (u < -tol || u > bound_C + tol) {
      std::ostringstream os;
      os << "kernel " << name << ": bound 0 <= u <= C violated at d = " << d << " (u = " << u << ")";
      throw InputError(os.str());
    }
    if (std::abs(u - prev_u) > lipschitz_L * (d - prev_d) + tol) {
      std::ostringstream os;
      os << "kernel " << name << ": Lipschitz bound L = " << lipschitz_L << " violated near d = " << d;
      throw InputError(os.str());
    }
    prev_d = d;
    prev_u = u;
  }
}

KernelSpec zero_kernel() { return {"zero", [](double) { return 0.0; }, 0.0, 0.0, 0.0}; }

KernelSpec onsager_abs_sin_kernel() {
  return {"onsager_abs_sin", [](double d) { return std::abs(std::sin(d)); }, 1.0, 1.0, 0.0};
}

KernelSpec maier_saupe_kernel() {
  return {"maier_saupe",
          [](double d) {
            const double s = std::sin(d);
            return s * s;
          },
          1.0, 1.0, 0.0};
}

KernelSpec distance_power_kernel(double p, double max_distance) {
  if (!(p >= 1.0)) throw InputError("distance_p: exponent must be >= 1 for a Lipschitz kernel");
  if (!(max_distance > 0.0)) throw InputError("distance_p: max_distance must be positive");
  const double bound = std::pow(max_distance, p);
  const double lip = p * std::pow(max_distance, p - 1.0);
  return {"distance_p", [p](double d) { return std::pow(d, p); }, bound, lip, 0.0};
}

KernelSpec gaussian_well_kernel(double length) {
  if (!(length > 0.0)) throw InputError("gaussian_well: length must be positive");
  const double l2 = length * length;
  // max of (2d/l^2) exp(-d^2/l^2) is at d = l/sqrt(2).
  const double lip = std::sqrt(2.0) / length * std::exp(-0.5);
  return {"gaussian_well", [l2](double d) { return 1.0 - std::exp(-d * d / l2); }, 1.0, lip, 0.0};
}

KernelSpec make_kernel(const std::string& name, double parameter, double max_distance) {
  if (name == "onsager_abs_sin") return onsager_abs_sin_kernel();
  if (name == "maier_saupe") return maier_saupe_kernel();
  if (name == "zero") return zero_kernel();
  if (name == "distance_p") return distance_power_kernel(parameter, max_distance);
  if (name == "gaussian_well") return gaussian_well_kernel(parameter);
  throw InputError("unknown kernel '" + name + "'");
}

std::vector<double> distance_samples(const DiscreteCorpusSpace& space) {
  std::vector<double> out(space.distances());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> kernel_matrix(const DiscreteCorpusSpace& space, const KernelSpec& kernel) {
  std::vector<double> out(space.distances().size());
  std::transform(space.distances().begin(), space.distances().end(), out.begin(),
                 [&](double d) { return kernel(d); });
  return out;
}

std::vector<double> potential_from_matrix(std::span<const double> kmat, const GridDensity& f) {
  const std::size_t m = f.size();
  if (kmat.size() != m * m) throw InputError("potential: kernel matrix does not match density size");
  return potential_pairwise(f, [&](std::size_t i, std::size_t j) { return kmat[i * m + j]; });
}

std::vector<double> potential(const DiscreteCorpusSpace& space, const KernelSpec& kernel,
                              const GridDensity& f) {
  if (f.size() != space.size()) throw InputError("potential: density does not live on this space");
  return potential_pairwise(f, [&](std::size_t i, std::size_t j) { return kernel(space.distance(i, j)); });
}

double free_energy_from_potential(const GridDensity& f, std::span<const double> U, double b) {
  if (U.size() != f.size()) throw InputError("free_energy: potential size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double fi = f[i];
    if (fi < 0.0) throw InputError("free_energy: negative density value");
    if (fi == 0.0) continue;
    acc += (std::log(fi) + 0.5 * b * U[i]) * fi * f.weights()[i];
  }
  return acc;
}

double free_energy(const DiscreteCorpusSpace& space, const KernelSpec& kernel, const GridDensity& f,
                   double b) {
  return free_energy_from_potential(f, potential(space, kernel, f), b);
}

GridDensity gibbs_density(std::span<const double> U, std::vector<double> weights, double b) {
  if (U.size() != weights.size()) throw InputError("gibbs_density: size mismatch");
  const double umin = *std::min_element(U.begin(), U.end());
  std::vector<double> h(U.size());
  for (std::size_t i = 0; i < U.size(); ++i) h[i] = std::exp(-b * (U[i] - umin));
  return GridDensity::normalized(std::move(h), std::move(weights));
}

double onsager_residual_from_potential(const GridDensity& f, std::span<const double> U, double b) {
  const GridDensity h = gibbs_density(U, f.weights(), b);
  return f.max_abs_difference(h);
}

double onsager_residual(const DiscreteCorpusSpace& space, const KernelSpec& kernel,
                        const GridDensity& f, double b) {
  return onsager_residual_from_potential(f, potential(space, kernel, f), b);
}

}  // namespace onsager
