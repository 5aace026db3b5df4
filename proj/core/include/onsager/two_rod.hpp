#pragma once

// Two articulated rods on S^1 x S^1 interacting through the squared
// difference of their triangle areas,
//
//     u(p, q) = (sin(p1 - p2) - sin(q1 - q2))^2.
//
// The equilibrium depends only on theta = p1 - p2 and on one scalar z:
//
//     g(theta) = exp(-b (sin theta - z)^2) / Z,     [s](b, z) = 0,
//
// where [s] is the g-average of sin theta - z. The rescaled partition
// integral lambda(z, tau) = b^{1/2} int exp(-b (sin theta - z)^2), tau = 1/b,
// has z-critical points exactly at the solutions and solves the heat
// equation d_tau lambda = (1/4) d_z^2 lambda.

#include <cstddef>
#include <vector>

#include "onsager/core.hpp"

namespace onsager::two_rod {

inline constexpr std::size_t kDefaultGridN = 1024;
inline constexpr double kZCap = 1.0 - 1e-4;
inline constexpr double kRootTolerance = 1e-10;

struct TwoRodSolution {
  double b = 0.0;
  double z = 0.0;
  double gamma = 0.0;
  double energy = 0.0;  // product-space free energy
  GridDensity g;        // density in theta = p1 - p2 w.r.t. dtheta
};

class TwoRodModel {
 public:
  explicit TwoRodModel(std::size_t n = kDefaultGridN);

  const CircleGrid& grid() const { return grid_; }
  /// sin(theta_i), tabulated with exact odd/half-turn symmetry.
  const std::vector<double>& sines() const { return sin_; }

  double s_bracket(double b, double z) const;
  double lambda(double z, double tau) const;
  /// Central difference with h = min(1e-5, (1 - |z|)/10).
  double dlambda_dz(double z, double tau) const;
  /// Central-difference residual of d_tau lambda - (1/4) d_z^2 lambda.
  double heat_residual(double z, double tau, double h_z, double h_tau) const;

  /// Roots of [s](b, .) on [0, 1 - 1e-4], ascending, always starting with 0.
  std::vector<double> solve_z(double b) const;

  GridDensity density(double b, double z) const;
  double gamma_of(double b, double z) const;
  /// g-average of sin theta.
  double mean_sin(double b, double z) const;

  /// Free energy of f(p1, p2) = g(p1 - p2) on S^1 x S^1 with the normalized
  /// product measure, evaluated through the theta reduction.
  double energy(double b, double z) const;

  /// All roots with gamma and energy.
  std::vector<TwoRodSolution> solve(double b) const;

  /// Onsager residual of the composite density on the n x n product grid
  /// under the full four-angle kernel. O(n^4); meant for n <= 128.
  double product_residual(double b, double z) const;

 private:
  // Weights exp(-b (s_i - z)^2) divided by their maximum.
  std::vector<double> boltzmann(double b, double z) const;

  CircleGrid grid_;
  std::vector<double> sin_;
};

}  // namespace onsager::two_rod
