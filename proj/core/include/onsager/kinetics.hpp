#pragma once

// Kinetics of the Maier-Saupe model on S^1,
//
//     d_t f = f'' - b (f (K f)')',    K f = (y_1 / 2) cos 2theta,
//
// integrated two ways: the cosine-mode hierarchy
//
//     y_j' = -4 j^2 y_j + b j y_1 (y_{j-1} - y_{j+1}),  y_0 = 1, y_{J+1} = 0,
//
// and a pseudo-spectral method of lines on the uniform grid. The second is
// the oracle for the truncation of the first.

#include <cstddef>
#include <span>
#include <vector>

#include "onsager/core.hpp"

namespace onsager::kinetics {

inline constexpr std::size_t kDefaultModes = 32;
inline constexpr double kNegativeTolerance = 1e-8;

struct SpectralState {
  std::vector<double> y;
  double b = 0.0;
  double t = 0.0;
};

struct PdeState {
  CircleGrid grid;
  std::vector<double> f;  // density w.r.t. dtheta on grid
  double b = 0.0;
  double t = 0.0;

  GridDensity density() const;
};

std::vector<double> ode_rhs(std::span<const double> y, double b);

struct SpectralTrajectory {
  std::vector<SpectralState> samples;  // t = 0 and every sample time up to t_end
  double final_rhs_norm = 0.0;         // max_j |y_j'| at the last sample
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

struct SpectralOptions {
  std::size_t samples = 100;  // number of intervals between output times
  double initial_step = 1e-3;
  double min_step = 1e-13;
  std::size_t max_steps = 5'000'000;
};

/// Adaptive Dormand-Prince 5(4) in the interaction picture: the diagonal
/// -4 j^2 part is propagated exactly, so the linear stiffness costs nothing.
/// Throws NumericalError when the step size underflows.
SpectralTrajectory integrate_spectral(std::span<const double> y0, double b, double t_end, double tol,
                                      const SpectralOptions& options = {});

/// f'' - b (f (Kf)')' with spectral differentiation; integrates to zero.
std::vector<double> pde_rhs(const PdeState& state);

struct PdeOptions {
  std::size_t samples = 10;
  double growth_limit = 1e3;  // max f may not exceed growth_limit * initial max
};

/// Integrating-factor RK4 on the Fourier coefficients of f: diffusion is
/// exact, the advective term is explicit. `dt` must satisfy the advective
/// bound dt * b * (n/2) <= 2.8 (InputError otherwise).
std::vector<PdeState> integrate_pde(const PdeState& state0, double t_end, double dt,
                                    const PdeOptions& options = {});

/// Grid on which spectral states are reconstructed for energy evaluation.
CircleGrid evaluation_grid(std::size_t modes);

/// int (f log f - (b/2) f Kf) dtheta for the reconstructed density.
/// Throws InputError if the reconstruction dips below -1e-8.
double free_energy_spectral(std::span<const double> y, double b);

/// -int f ((log f - b Kf)')^2 dtheta, nonpositive.
double dissipation_rate(std::span<const double> y, double b);

/// Same free energy for a grid density (y_1 taken by quadrature).
double free_energy_grid(std::span<const double> f, const CircleGrid& grid, double b);

}  // namespace onsager::kinetics
