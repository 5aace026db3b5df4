#pragma once

// Onsager solver on finite metric measure spaces: damped fixed-point
// iteration, entropic mirror descent on the free energy, product spaces
// with like-part kernels, and zero-temperature concentration diagnostics.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "onsager/core.hpp"

namespace onsager::corpus {

class CorpusProblem {
 public:
  /// Checks the kernel against (bound, Lipschitz, u(0) = 0) on the space's
  /// distances unless `check_kernel` is false.
  CorpusProblem(DiscreteCorpusSpace space, KernelSpec kernel, double b, bool check_kernel = true);

  const DiscreteCorpusSpace& space() const { return space_; }
  const KernelSpec& kernel() const { return kernel_; }
  double b() const { return b_; }
  std::size_t size() const { return space_.size(); }
  std::span<const double> kernel_values() const { return kmat_; }

  CorpusProblem with_b(double b) const;

  GridDensity uniform() const { return GridDensity::uniform(space_.weights()); }
  std::vector<double> potential(const GridDensity& f) const;
  double free_energy(const GridDensity& f) const;
  double residual(const GridDensity& f) const;
  /// normalize(exp(-b U[f])).
  GridDensity gibbs(const GridDensity& f) const;

 private:
  DiscreteCorpusSpace space_;
  KernelSpec kernel_;
  double b_;
  std::vector<double> kmat_;
};

struct SolveReport {
  SolveReport(GridDensity f, double intensity) : density(std::move(f)), b(intensity) {}

  GridDensity density;
  double b = 0.0;
  double residual = 0.0;
  double energy = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool oscillating = false;
  std::string note;
  std::vector<double> energy_trace;  // accepted iterates (minimize_energy)
};

/// normalize(1 + amplitude * xi_i), xi uniform on [-1, 1] from std::mt19937_64(seed).
GridDensity perturbed_uniform(std::vector<double> weights, std::uint64_t seed, double amplitude = 0.01);

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-10;
  std::size_t max_iter = 200000;
  std::optional<GridDensity> f_init;
  std::size_t stall_window = 500;  // iterations without residual progress before giving up
};

SolveReport fixed_point_solve(const CorpusProblem& problem, const FixedPointOptions& options = {});

struct MinimizeOptions {
  double tol = 1e-12;  // free-energy decrement; residual must also reach 10 * tol
  std::size_t max_iter = 200000;
  std::optional<GridDensity> f_init;  // default: perturbed_uniform(seed)
  std::uint64_t seed = 1;
  double perturbation = 0.01;
  std::size_t restarts = 1;  // extra starts use seed + k; the lowest energy wins
  std::size_t anderson_depth = 5;  // 0 gives the plain multiplicative update
  /// Extra starts from normalize(exp(-b u(d(x, .)))), the Gibbs density of a
  /// point mass at x, for this many nodes x, heaviest first. The free energy
  /// is not convex for large b and near-uniform starts can miss the basin of
  /// a concentrated minimizer.
  std::size_t concentrated_starts = 0;
};

/// Multiplicative update f <- normalize(f^(1-eta) exp(-eta b U[f])) with
/// backtracking on eta, optionally Anderson-accelerated in log f. A step is
/// accepted only if the free energy does not rise beyond its rounding error;
/// rejected accelerated steps fall back to the plain update.
SolveReport minimize_energy(const CorpusProblem& problem, const MinimizeOptions& options = {});

/// Free energy of chi = 1_B / mu(B), B = closed ball of `radius` about `center`.
double ball_indicator_energy(const CorpusProblem& problem, std::size_t center, double radius);
/// Minimum of ball_indicator_energy over all centres.
double best_ball_energy(const CorpusProblem& problem, double radius);

/// max U[1] - min U[1]; zero iff the uniform density solves the equation.
double uniform_solution_residual(const CorpusProblem& problem);

/// min over nodes and radii of mu(B(x, r)) - c exp(-r^{-k}).
double ball_measure_profile(const DiscreteCorpusSpace& space, double k, double c, std::span<const double> radii);

/// Cartesian product of component spaces with the product measure. Points
/// are tuples in mixed radix, last component fastest. No joint metric is
/// stored; materialize() builds one on request.
class ProductSpace {
 public:
  static constexpr std::size_t kMaxPoints = std::size_t{1} << 24;

  explicit ProductSpace(std::vector<DiscreteCorpusSpace> components);

  std::size_t size() const { return size_; }
  std::size_t component_count() const { return components_.size(); }
  const DiscreteCorpusSpace& component(std::size_t j) const { return components_[j]; }
  const std::vector<double>& weights() const { return weights_; }

  std::vector<std::size_t> tuple(std::size_t index) const;
  std::size_t index(std::span<const std::size_t> tuple) const;
  std::size_t stride(std::size_t j) const { return strides_[j]; }
  /// j-th coordinate of the point `index`.
  std::size_t coordinate(std::size_t index, std::size_t j) const {
    return (index / strides_[j]) % components_[j].size();
  }

  /// Marginal density of the j-th factor, w.r.t. its own measure.
  GridDensity marginal(const GridDensity& f, std::size_t j) const;

  enum class Metric { sum, max };
  DiscreteCorpusSpace materialize(Metric metric) const;

 private:
  std::vector<DiscreteCorpusSpace> components_;
  std::vector<std::size_t> strides_;
  std::vector<double> weights_;
  std::size_t size_ = 0;
};

ProductSpace product_space(std::vector<DiscreteCorpusSpace> components);

/// U(p) = sum_j U_j[f_j](p_j), f_j the j-th marginal of f.
std::vector<double> sum_kernel_potential(const ProductSpace& product, std::span<const KernelSpec> kernels,
                                         const GridDensity& f);

double product_onsager_residual(const ProductSpace& product, std::span<const KernelSpec> kernels,
                                const GridDensity& f, double b);
double product_free_energy(const ProductSpace& product, std::span<const KernelSpec> kernels,
                           const GridDensity& f, double b);
double uniform_solution_residual(const ProductSpace& product, std::span<const KernelSpec> kernels);

/// f(p) = prod_j f_j(p_j).
GridDensity product_compose(const ProductSpace& product, std::span<const SolveReport> components);
GridDensity product_compose(const ProductSpace& product, std::span<const GridDensity> components);

struct ConcentrationReport {
  std::vector<double> u_inf;  // potential of the largest-b density
  double min_u = 0.0;
  std::vector<std::size_t> sigma_set;
  std::vector<double> b_values;       // ascending, parallel to mass_on_sigma
  std::vector<double> mass_on_sigma;  // per report
  std::vector<double> potential_drift;  // sup |U_k - U_{k-1}| between successive reports
  bool degenerate = false;              // u_inf constant within eps
};

/// Reports must carry at least two distinct b values.
ConcentrationReport concentration_report(const CorpusProblem& problem, std::span<const SolveReport> reports,
                                         double eps);

}  // namespace onsager::corpus
