#pragma once

// Configuration spaces, densities, interaction kernels and the two
// quantities every solver in this library is judged by: the mean-field
// free energy and the sup-norm defect of the self-consistency equation
//
//     f = exp(-b U[f]) / Z,     U[f](x) = sum_y u(d(x, y)) f(y) mu(y).

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "onsager/errors.hpp"

namespace onsager {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr std::size_t kDefaultGridN = 256;
inline constexpr std::size_t kDefaultModes = 64;

/// Uniform grid on [0, 2pi) with trapezoid weights 2pi/n.
class CircleGrid {
 public:
  explicit CircleGrid(std::size_t n = kDefaultGridN);

  std::size_t size() const { return nodes_.size(); }
  double node(std::size_t i) const { return nodes_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }
  double weight() const { return kTwoPi / static_cast<double>(nodes_.size()); }
  std::vector<double> weights() const;

 private:
  std::vector<double> nodes_;
};

/// Trapezoid rule on the periodic grid: (2pi/n) * sum(values).
double periodic_quadrature(std::span<const double> values, const CircleGrid& grid);

/// Nonnegative density sampled at the nodes of a weighted space, normalized
/// so that sum(values * weights) == 1. Weights are the quadrature weights of
/// the reference measure (2pi/n on a circle grid, mu_i on a corpus space).
class GridDensity {
 public:
  static constexpr double kMassTolerance = 1e-10;

  /// Validates nonnegativity and normalization; throws InputError.
  GridDensity(std::vector<double> values, std::vector<double> weights);

  static GridDensity uniform(std::vector<double> weights);
  /// Rescales values to unit mass. Values must be nonnegative with positive mass.
  static GridDensity normalized(std::vector<double> values, std::vector<double> weights);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }
  double mass() const;
  double max_abs_difference(const GridDensity& other) const;

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
};

/// Truncated even-cosine representation on the circle
///   f(theta) = 1/(2pi) + (1/pi) sum_{j=1..J} y_j cos(2 j theta),
/// with y_0 = 1 implicit.
struct FourierDensity {
  std::vector<double> coeffs;  // y_1 .. y_J

  std::size_t truncation() const { return coeffs.size(); }
  std::vector<double> reconstruct(const CircleGrid& grid) const;
  /// y_j = int f cos(2 j theta) dtheta by periodic quadrature.
  static FourierDensity project(std::span<const double> values, const CircleGrid& grid,
                                std::size_t modes);
};

/// Mass of a circle density within `halfwidth` (periodic distance) of any centre.
double mass_within(const GridDensity& f, const CircleGrid& grid, std::span<const double> centers,
                   double halfwidth);

/// Periodic distance between two angles, in [0, pi].
double angular_distance(double a, double b);

enum class TriangleCheck {
  automatic,  // check when size() <= kTriangleCheckLimit
  always,
  never,
};

inline constexpr std::size_t kTriangleCheckLimit = 512;

/// Finite metric measure space (M, d, mu).
class DiscreteCorpusSpace {
 public:
  static constexpr double kWeightTolerance = 1e-12;
  static constexpr double kTriangleTolerance = 1e-9;

  /// `dist` is the dense row-major m*m matrix. Throws InputError naming the
  /// violated invariant (symmetry, zero diagonal, triangle, weights).
  DiscreteCorpusSpace(std::vector<double> dist, std::vector<double> mu,
                      std::vector<std::string> labels = {},
                      TriangleCheck check = TriangleCheck::automatic);

  /// Equispaced circle with arc-length distance and weights 1/n.
  static DiscreteCorpusSpace circle(std::size_t n);

  std::size_t size() const { return mu_.size(); }
  double distance(std::size_t i, std::size_t j) const { return dist_[i * size() + j]; }
  std::span<const double> row(std::size_t i) const {
    return {dist_.data() + i * size(), size()};
  }
  const std::vector<double>& distances() const { return dist_; }
  const std::vector<double>& weights() const { return mu_; }
  const std::vector<std::string>& labels() const { return labels_; }
  double diameter() const;

  void check_triangle_inequality(double tol = kTriangleTolerance) const;

 private:
  std::vector<double> dist_;
  std::vector<double> mu_;
  std::vector<std::string> labels_;
};

/// Interaction kernel as a function of distance. `profile` is the
/// normalized part (profile(0) == 0, 0 <= profile <= bound_C, Lipschitz
/// constant lipschitz_L); `shift` is an additive constant, which moves the
/// potential by `shift` and the free energy by b*shift/2 but leaves the
/// equilibria alone.
struct KernelSpec {
  std::string name;
  std::function<double(double)> profile;
  double bound_C = 0.0;
  double lipschitz_L = 0.0;
  double shift = 0.0;

  double operator()(double d) const { return profile(d) + shift; }
  KernelSpec shifted(double c) const;

  /// Checks u(0) = 0, the bound and the Lipschitz estimate on the given
  /// distance samples (sorted internally; consecutive pairs suffice).
  void check_conformity(std::vector<double> samples, double tol = 1e-12) const;
};

KernelSpec zero_kernel();
/// |sin d|, Onsager's excluded-volume kernel on S^1 with arc distance.
KernelSpec onsager_abs_sin_kernel();
/// sin^2 d = 1 - cos^2 d, the Maier-Saupe kernel -cos^2 shifted by 1.
KernelSpec maier_saupe_kernel();
/// d^p for p >= 1 on [0, max_distance].
KernelSpec distance_power_kernel(double p, double max_distance);
/// 1 - exp(-d^2 / l^2), the well -exp(-d^2/l^2) shifted to vanish at 0.
KernelSpec gaussian_well_kernel(double length);

/// Selects a kernel by name: onsager_abs_sin, maier_saupe, zero,
/// distance_p (parameter p), gaussian_well (parameter l).
KernelSpec make_kernel(const std::string& name, double parameter, double max_distance);

/// Distances occurring in the space (diagonal included), for conformity checks.
std::vector<double> distance_samples(const DiscreteCorpusSpace& space);

/// Dense m*m matrix of kernel values u(d_ij).
std::vector<double> kernel_matrix(const DiscreteCorpusSpace& space, const KernelSpec& kernel);

/// U_i = sum_j K_ij f_j w_j for a dense m*m kernel matrix.
std::vector<double> potential_from_matrix(std::span<const double> kmat, const GridDensity& f);

std::vector<double> potential(const DiscreteCorpusSpace& space, const KernelSpec& kernel,
                              const GridDensity& f);

/// Potential for kernels that are not functions of a single distance:
/// U_i = sum_j u(i, j) f_j w_j.
template <class PairKernel>
std::vector<double> potential_pairwise(const GridDensity& f, PairKernel&& u) {
  const std::size_t m = f.size();
  std::vector<double> fw(m);
  for (std::size_t j = 0; j < m; ++j) fw[j] = f[j] * f.weights()[j];
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += u(i, j) * fw[j];
    out[i] = acc;
  }
  return out;
}

/// sum_i (log f_i + (b/2) U_i) f_i w_i, with 0 log 0 = 0.
double free_energy_from_potential(const GridDensity& f, std::span<const double> U, double b);

double free_energy(const DiscreteCorpusSpace& space, const KernelSpec& kernel,
                   const GridDensity& f, double b);

/// h = exp(-b U) / Z with Z = sum exp(-b U_i) w_i, evaluated with the
/// minimum of U factored out.
GridDensity gibbs_density(std::span<const double> U, std::vector<double> weights, double b);

/// max_i |f_i - h_i| with h = gibbs_density(U, w, b).
double onsager_residual_from_potential(const GridDensity& f, std::span<const double> U, double b);

double onsager_residual(const DiscreteCorpusSpace& space, const KernelSpec& kernel,
                        const GridDensity& f, double b);

}  // namespace onsager
