#pragma once

// Equilibria of the Maier-Saupe model on S^1. Every solution of the
// self-consistency equation has the form
//
//     g(r)(theta) = exp(r cos 2theta) / Z(r),
//
// with Fourier coefficients g_j(r) = I_j(r) / I_0(r), and the order
// parameter r is tied to the interaction intensity b by g_1(r) = 2r/b.

#include <cstddef>
#include <span>
#include <vector>

#include "onsager/core.hpp"

namespace onsager::ms {

inline constexpr double kCriticalIntensity = 4.0;
inline constexpr double kMaxExponent = 700.0;
inline constexpr double kRootTolerance = 1e-12;

struct BranchPoint {
  double r = 0.0;
  double b = 0.0;
  std::vector<double> g;  // g_1 .. g_J
  double dbdr = 0.0;
};

/// Z(r) = int_0^{2pi} exp(r cos 2theta) dtheta by periodic quadrature.
/// Throws NumericalError for |r| > 700.
double partition_Z(double r, const CircleGrid& grid = CircleGrid{});
/// log Z(r), valid for any finite r.
double log_partition_Z(double r, const CircleGrid& grid = CircleGrid{});

/// g_1 .. g_J via the minimal-solution (backward) continued fraction for
/// I_j / I_{j-1}; accurate to relative precision in every mode.
std::vector<double> g_coeffs(double r, std::size_t J = kDefaultModes);

/// g_1 .. g_J by direct quadrature of exp(r cos 2theta) cos(2 j theta).
/// Absolute accuracy ~1e-16, so the deep tail is roundoff.
std::vector<double> g_coeffs_quadrature(double r, std::size_t J, const CircleGrid& grid = CircleGrid{});

/// g_1(r) alone (one continued fraction).
double g1(double r);

/// max_j |g_{j+1} - (g_{j-1} - (2j/r) g_j)|, g_0 = 1, over the vector given.
double recursion_check(std::span<const double> g, double r);

/// Nonnegative roots of g_1(r) = 2r/b, ascending: {0} for b <= 4 and
/// {0, r(b)} for b > 4. The negative root is -r(b).
std::vector<double> solve_r_of_b(double b);

/// r(b) > 0 on the nematic branch; b must exceed 4.
double nematic_r(double b);

double b_of_r(double r);

/// (b^2 / 2r)(g_1^2 - g_2), the derivative of the inverse function b(r).
double db_dr(double r);

/// K f = (y_1 / 2) cos 2theta: only the first mode survives.
FourierDensity maier_saupe_potential(const FourierDensity& y);

/// Sweep b linearly over [b_min, b_max] (inclusive, `steps` points),
/// warm-starting each root solve from the previous r.
std::vector<BranchPoint> branch_continuation(double b_min, double b_max, std::size_t steps,
                                             std::size_t J = kDefaultModes);

/// exp(r cos 2theta) / Z(r) on the grid, as a density w.r.t. dtheta.
GridDensity density(double r, const CircleGrid& grid = CircleGrid{});

/// Equilibrium density on the nematic branch (uniform for b <= 4).
GridDensity equilibrium_density(double b, const CircleGrid& grid = CircleGrid{});

/// Mass of the b-equilibrium within +/- halfwidth of {0, pi}.
double zero_temp_mass(double b, double halfwidth, const CircleGrid& grid = CircleGrid{});

}  // namespace onsager::ms
