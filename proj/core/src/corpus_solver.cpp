#include "onsager/corpus_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace onsager::corpus {

namespace {

constexpr double kLogFloor = 1e-300;

void require_intensity(double b) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("b must be a finite nonnegative number");
}

GridDensity check_init(const std::optional<GridDensity>& init, const CorpusProblem& problem, GridDensity fallback) {
  if (!init) return fallback;
  if (init->size() != problem.size()) throw InputError("f_init does not live on the problem's space");
  return *init;
}

}  // namespace

CorpusProblem::CorpusProblem(DiscreteCorpusSpace space, KernelSpec kernel, double b, bool check_kernel)
    : space_(std::move(space)), kernel_(std::move(kernel)), b_(b) {
  require_intensity(b);
  if (check_kernel) kernel_.check_conformity(distance_samples(space_));
  kmat_ = kernel_matrix(space_, kernel_);
}

CorpusProblem CorpusProblem::with_b(double b) const {
  require_intensity(b);
  CorpusProblem out = *this;
  out.b_ = b;
  return out;
}

std::vector<double> CorpusProblem::potential(const GridDensity& f) const {
  if (f.size() != size()) throw InputError("density does not live on the problem's space");
  return potential_from_matrix(kmat_, f);
}

double CorpusProblem::free_energy(const GridDensity& f) const {
  return free_energy_from_potential(f, potential(f), b_);
}

double CorpusProblem::residual(const GridDensity& f) const {
  return onsager_residual_from_potential(f, potential(f), b_);
}

GridDensity CorpusProblem::gibbs(const GridDensity& f) const {
  return gibbs_density(potential(f), space_.weights(), b_);
}

GridDensity perturbed_uniform(std::vector<double> weights, std::uint64_t seed, double amplitude) {
  if (!(amplitude >= 0.0 && amplitude < 1.0)) throw InputError("perturbation amplitude must lie in [0, 1)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xi(-1.0, 1.0);
  std::vector<double> v(weights.size());
  for (double& x : v) x = 1.0 + amplitude * xi(rng);
  return GridDensity::normalized(std::move(v), std::move(weights));
}

SolveReport fixed_point_solve(const CorpusProblem& problem, const FixedPointOptions& options) {
  if (!(options.damping > 0.0 && options.damping <= 1.0)) throw InputError("fixed_point_solve: damping must lie in (0, 1]");
  if (!(options.tol > 0.0)) throw InputError("fixed_point_solve: tol must be positive");
  GridDensity f = check_init(options.f_init, problem, problem.uniform());
  const double alpha = options.damping;
  const auto& w = problem.space().weights();

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_iter = 0;
  SolveReport report{f, problem.b()};
  for (std::size_t it = 0;; ++it) {
    const GridDensity h = problem.gibbs(f);
    const double res = f.max_abs_difference(h);
    if (res <= options.tol) {
      report.converged = true;
      report.residual = res;
      report.iterations = it;
      break;
    }
    if (res < best * (1.0 - 1e-6)) {
      best = res;
      best_iter = it;
    } else if (it - best_iter >= options.stall_window) {
      report.oscillating = true;
      report.residual = res;
      report.iterations = it;
      std::ostringstream os;
      os << "no residual progress in " << options.stall_window
         << " iterations; the damped map may be cycling, try damping < " << alpha;
      report.note = os.str();
      break;
    }
    if (it == options.max_iter) {
      report.residual = res;
      report.iterations = it;
      report.note = "max_iter reached";
      break;
    }
    std::vector<double> next(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) next[i] = (1.0 - alpha) * f[i] + alpha * h[i];
    f = GridDensity::normalized(std::move(next), w);
  }
  report.density = f;
  report.energy = problem.free_energy(f);
  return report;
}

namespace {

// Rounding error bound for free_energy_from_potential at (f, U).
double energy_slack(const GridDensity& f, std::span<const double> U, double b) {
  double scale = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 0.0) scale += (std::abs(std::log(f[i])) + 0.5 * b * std::abs(U[i]) + 1.0) * f[i] * f.weights()[i];
  }
  return 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

std::vector<double> log_density(const GridDensity& f) {
  std::vector<double> x(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) x[i] = std::log(std::max(f[i], kLogFloor));
  return x;
}

GridDensity density_from_log(std::span<const double> x, const std::vector<double>& w) {
  const double top = *std::max_element(x.begin(), x.end());
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = std::exp(x[i] - top);
  return GridDensity::normalized(std::move(v), w);
}

// Solves the small regularized normal equations (A^T W A) c = A^T W r for
// the Anderson mixing coefficients. Columns of A are stored contiguously.
std::vector<double> anderson_coefficients(const std::vector<std::vector<double>>& dR, std::span<const double> r,
                                          const std::vector<double>& w) {
  const std::size_t k = dR.size();
  std::vector<double> G(k * k), rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t c = a; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) acc += w[i] * dR[a][i] * dR[c][i];
      G[a * k + c] = G[c * k + a] = acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) acc += w[i] * dR[a][i] * r[i];
    rhs[a] = acc;
  }
  double trace = 0.0;
  for (std::size_t a = 0; a < k; ++a) trace += G[a * k + a];
  for (std::size_t a = 0; a < k; ++a) G[a * k + a] += 1e-12 * trace + 1e-300;
  // Gaussian elimination with partial pivoting; k is at most a handful.
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t row = col + 1; row < k; ++row) {
      if (std::abs(G[row * k + col]) > std::abs(G[piv * k + col])) piv = row;
    }
    if (piv != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(G[col * k + c], G[piv * k + c]);
      std::swap(rhs[col], rhs[piv]);
    }
    for (std::size_t row = col + 1; row < k; ++row) {
      const double factor = G[row * k + col] / G[col * k + col];
      for (std::size_t c = col; c < k; ++c) G[row * k + c] -= factor * G[col * k + c];
      rhs[row] -= factor * rhs[col];
    }
  }
  std::vector<double> gamma(k);
  for (std::size_t row = k; row-- > 0;) {
    double acc = rhs[row];
    for (std::size_t c = row + 1; c < k; ++c) acc -= G[row * k + c] * gamma[c];
    gamma[row] = acc / G[row * k + row];
  }
  return gamma;
}

SolveReport descend(const CorpusProblem& problem, GridDensity f, const MinimizeOptions& options) {
  const auto& w = problem.space().weights();
  const double b = problem.b();
  const std::size_t m = problem.size();
  const std::size_t depth = options.anderson_depth;

  std::vector<double> U = problem.potential(f);
  double E = free_energy_from_potential(f, U, b);
  std::vector<double> x = log_density(f);
  double eta = 1.0;
  double decrement = std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> dX, dR;
  std::vector<double> x_prev, r_prev;

  SolveReport report{f, b};
  report.energy_trace.push_back(E);
  std::size_t it = 0;
  for (; it < options.max_iter; ++it) {
    // Log-space fixed-point residual r = log gibbs(f) - log f.
    const GridDensity h = gibbs_density(U, w, b);
    std::vector<double> r = log_density(h);
    for (std::size_t i = 0; i < m; ++i) r[i] -= x[i];
    report.residual = f.max_abs_difference(h);
    if (decrement < options.tol && report.residual <= 10.0 * options.tol) {
      report.converged = true;
      break;
    }

    if (depth > 0 && !x_prev.empty()) {
      std::vector<double> ddx(m), ddr(m);
      for (std::size_t i = 0; i < m; ++i) {
        ddx[i] = x[i] - x_prev[i];
        ddr[i] = r[i] - r_prev[i];
      }
      dX.push_back(std::move(ddx));
      dR.push_back(std::move(ddr));
      if (dX.size() > depth) {
        dX.erase(dX.begin());
        dR.erase(dR.begin());
      }
    }
    x_prev = x;
    r_prev = r;

    const double slack = energy_slack(f, U, b);
    bool accepted = false;
    if (!dR.empty()) {
      // Anderson candidate, shortened toward the plain step if it fails.
      const auto gamma = anderson_coefficients(dR, r, w);
      std::vector<double> correction(m, 0.0);
      for (std::size_t a = 0; a < gamma.size(); ++a) {
        for (std::size_t i = 0; i < m; ++i) correction[i] += gamma[a] * (dX[a][i] + eta * dR[a][i]);
      }
      for (double scale = 1.0; scale >= 0.125 && !accepted; scale *= 0.5) {
        std::vector<double> xc(m);
        for (std::size_t i = 0; i < m; ++i) xc[i] = x[i] + eta * r[i] - scale * correction[i];
        GridDensity candidate = density_from_log(xc, w);
        std::vector<double> U_new = problem.potential(candidate);
        const double E_new = free_energy_from_potential(candidate, U_new, b);
        if (std::isfinite(E_new) && E_new <= E + slack) {
          decrement = E - E_new;
          f = std::move(candidate);
          U = std::move(U_new);
          E = E_new;
          accepted = true;
        }
      }
    }
    while (!accepted && eta >= 1e-12) {
      std::vector<double> xc(m);
      for (std::size_t i = 0; i < m; ++i) xc[i] = x[i] + eta * r[i];
      GridDensity candidate = density_from_log(xc, w);
      std::vector<double> U_new = problem.potential(candidate);
      const double E_new = free_energy_from_potential(candidate, U_new, b);
      if (E_new <= E + slack) {
        decrement = E - E_new;
        f = std::move(candidate);
        U = std::move(U_new);
        E = E_new;
        accepted = true;
        eta = std::min(1.0, 2.0 * eta);
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      report.note = "step size underflow in backtracking";
      break;
    }
    x = log_density(f);
    report.energy_trace.push_back(E);
  }
  if (it == options.max_iter) report.note = "max_iter reached";
  report.iterations = it;
  report.density = f;
  report.energy = E;
  return report;
}

}  // namespace

SolveReport minimize_energy(const CorpusProblem& problem, const MinimizeOptions& options) {
  if (!(options.tol > 0.0)) throw InputError("minimize_energy: tol must be positive");
  const std::size_t starts = std::max<std::size_t>(1, options.restarts);
  std::optional<SolveReport> best;
  for (std::size_t k = 0; k < starts; ++k) {
    GridDensity init = (k == 0 && options.f_init)
                           ? check_init(options.f_init, problem, problem.uniform())
                           : perturbed_uniform(problem.space().weights(), options.seed + k, options.perturbation);
    SolveReport r = descend(problem, std::move(init), options);
    if (!best || r.energy < best->energy) best = std::move(r);
  }
  const std::size_t m = problem.size();
  std::vector<std::size_t> nodes(m);
  std::iota(nodes.begin(), nodes.end(), 0);
  const auto& w = problem.space().weights();
  std::stable_sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t c) { return w[a] > w[c]; });
  const auto kmat = problem.kernel_values();
  for (std::size_t k = 0; k < std::min(m, options.concentrated_starts); ++k) {
    const std::size_t x = nodes[k];
    std::vector<double> v(m);
    for (std::size_t j = 0; j < m; ++j) v[j] = -problem.b() * kmat[x * m + j];
    const double top = *std::max_element(v.begin(), v.end());
    for (double& e : v) e = std::max(std::exp(e - top), 1e-300);
    SolveReport r = descend(problem, GridDensity::normalized(std::move(v), w), options);
    if (r.energy < best->energy) best = std::move(r);
  }
  return *best;
}

double ball_indicator_energy(const CorpusProblem& problem, std::size_t center, double radius) {
  const auto& space = problem.space();
  if (center >= space.size()) throw InputError("ball_indicator_energy: centre out of range");
  if (!(radius >= 0.0)) throw InputError("ball_indicator_energy: radius must be nonnegative");
  std::vector<double> chi(space.size(), 0.0);
  double mass = 0.0;
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (space.distance(center, j) <= radius + 1e-12) {
      chi[j] = 1.0;
      mass += space.weights()[j];
    }
  }
  if (!(mass > 0.0)) throw InputError("ball_indicator_energy: empty ball");
  return problem.free_energy(GridDensity::normalized(std::move(chi), space.weights()));
}

double best_ball_energy(const CorpusProblem& problem, double radius) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < problem.size(); ++c) best = std::min(best, ball_indicator_energy(problem, c, radius));
  return best;
}

double uniform_solution_residual(const CorpusProblem& problem) {
  const auto U = problem.potential(problem.uniform());
  const auto [lo, hi] = std::minmax_element(U.begin(), U.end());
  return *hi - *lo;
}

double ball_measure_profile(const DiscreteCorpusSpace& space, double k, double c, std::span<const double> radii) {
  if (!(k > 0.0 && k < 1.0)) throw InputError("ball_measure_profile: k must lie in (0, 1)");
  if (!(c > 0.0)) throw InputError("ball_measure_profile: c must be positive");
  if (radii.empty()) throw InputError("ball_measure_profile: no radii given");
  double margin = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    if (!(r > 0.0)) throw InputError("ball_measure_profile: radii must be positive");
    const double lower = c * std::exp(-std::pow(r, -k));
    for (std::size_t x = 0; x < space.size(); ++x) {
      double mass = 0.0;
      for (std::size_t y = 0; y < space.size(); ++y) {
        if (space.distance(x, y) <= r) mass += space.weights()[y];
      }
      margin = std::min(margin, mass - lower);
    }
  }
  return margin;
}

ProductSpace::ProductSpace(std::vector<DiscreteCorpusSpace> components) : components_(std::move(components)) {
  if (components_.size() < 2) throw InputError("product_space: need at least two components");
  const std::size_t N = components_.size();
  strides_.assign(N, 1);
  size_ = 1;
  for (std::size_t j = N; j-- > 0;) {
    strides_[j] = size_;
    const std::size_t mj = components_[j].size();
    if (size_ > kMaxPoints / mj) {
      throw InputError("product_space: product exceeds the memory budget of " + std::to_string(kMaxPoints) + " points");
    }
    size_ *= mj;
  }
  weights_.assign(size_, 1.0);
  for (std::size_t idx = 0; idx < size_; ++idx) {
    for (std::size_t j = 0; j < N; ++j) {
      weights_[idx] *= components_[j].weights()[(idx / strides_[j]) % components_[j].size()];
    }
  }
}

std::vector<std::size_t> ProductSpace::tuple(std::size_t index) const {
  if (index >= size_) throw InputError("ProductSpace::tuple: index out of range");
  std::vector<std::size_t> t(components_.size());
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = (index / strides_[j]) % components_[j].size();
  return t;
}

std::size_t ProductSpace::index(std::span<const std::size_t> t) const {
  if (t.size() != components_.size()) throw InputError("ProductSpace::index: tuple has the wrong length");
  std::size_t idx = 0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] >= components_[j].size()) throw InputError("ProductSpace::index: component index out of range");
    idx += t[j] * strides_[j];
  }
  return idx;
}

GridDensity ProductSpace::marginal(const GridDensity& f, std::size_t j) const {
  if (f.size() != size_) throw InputError("marginal: density does not live on the product");
  if (j >= components_.size()) throw InputError("marginal: component out of range");
  const auto& comp = components_[j];
  std::vector<double> acc(comp.size(), 0.0);
  for (std::size_t idx = 0; idx < size_; ++idx) acc[(idx / strides_[j]) % comp.size()] += f[idx] * weights_[idx];
  for (std::size_t p = 0; p < comp.size(); ++p) acc[p] /= comp.weights()[p];
  return GridDensity::normalized(std::move(acc), comp.weights());
}

DiscreteCorpusSpace ProductSpace::materialize(Metric metric) const {
  std::vector<double> dist(size_ * size_);
  std::vector<std::vector<std::size_t>> tuples(size_);
  for (std::size_t a = 0; a < size_; ++a) tuples[a] = tuple(a);
  for (std::size_t a = 0; a < size_; ++a) {
    for (std::size_t c = 0; c < size_; ++c) {
      double d = 0.0;
      for (std::size_t j = 0; j < components_.size(); ++j) {
        const double dj = components_[j].distance(tuples[a][j], tuples[c][j]);
        d = metric == Metric::sum ? d + dj : std::max(d, dj);
      }
      dist[a * size_ + c] = d;
    }
  }
  std::vector<double> w = weights_;
  // Re-sum the product weights to keep the unit-mass invariant tight.
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return DiscreteCorpusSpace(std::move(dist), std::move(w), {}, TriangleCheck::never);
}

ProductSpace product_space(std::vector<DiscreteCorpusSpace> components) { return ProductSpace(std::move(components)); }

std::vector<double> sum_kernel_potential(const ProductSpace& product, std::span<const KernelSpec> kernels,
                                         const GridDensity& f) {
  if (kernels.size() != product.component_count()) throw InputError("sum_kernel_potential: need one kernel per component");
  if (f.size() != product.size()) throw InputError("sum_kernel_potential: density does not live on the product");
  std::vector<double> U(product.size(), 0.0);
  for (std::size_t j = 0; j < kernels.size(); ++j) {
    const auto& comp = product.component(j);
    const auto Uj = potential(comp, kernels[j], product.marginal(f, j));
    for (std::size_t idx = 0; idx < product.size(); ++idx) U[idx] += Uj[product.coordinate(idx, j)];
  }
  return U;
}

double product_onsager_residual(const ProductSpace& product, std::span<const KernelSpec> kernels,
                                const GridDensity& f, double b) {
  return onsager_residual_from_potential(f, sum_kernel_potential(product, kernels, f), b);
}

double product_free_energy(const ProductSpace& product, std::span<const KernelSpec> kernels, const GridDensity& f,
                           double b) {
  return free_energy_from_potential(f, sum_kernel_potential(product, kernels, f), b);
}

double uniform_solution_residual(const ProductSpace& product, std::span<const KernelSpec> kernels) {
  const auto U = sum_kernel_potential(product, kernels, GridDensity::uniform(product.weights()));
  const auto [lo, hi] = std::minmax_element(U.begin(), U.end());
  return *hi - *lo;
}

GridDensity product_compose(const ProductSpace& product, std::span<const GridDensity> components) {
  if (components.size() != product.component_count()) throw InputError("product_compose: need one density per component");
  for (std::size_t j = 0; j < components.size(); ++j) {
    if (components[j].size() != product.component(j).size()) {
      throw InputError("product_compose: component density does not match its space");
    }
  }
  std::vector<double> v(product.size(), 1.0);
  for (std::size_t idx = 0; idx < product.size(); ++idx) {
    for (std::size_t j = 0; j < components.size(); ++j) v[idx] *= components[j][product.coordinate(idx, j)];
  }
  return GridDensity::normalized(std::move(v), product.weights());
}

GridDensity product_compose(const ProductSpace& product, std::span<const SolveReport> components) {
  std::vector<GridDensity> densities;
  for (const auto& r : components) {
    if (!r.converged) throw InputError("product_compose: component report did not converge");
    densities.push_back(r.density);
  }
  return product_compose(product, std::span<const GridDensity>(densities));
}

ConcentrationReport concentration_report(const CorpusProblem& problem, std::span<const SolveReport> reports,
                                         double eps) {
  if (!(eps >= 0.0)) throw InputError("concentration_report: eps must be nonnegative");
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return reports[a].b < reports[b].b; });
  if (reports.size() < 2 || reports[order.front()].b == reports[order.back()].b) {
    throw InputError("concentration_report: need reports at two or more distinct b values");
  }

  ConcentrationReport out;
  std::vector<std::vector<double>> potentials;
  for (std::size_t k : order) {
    potentials.push_back(problem.potential(reports[k].density));
    out.b_values.push_back(reports[k].b);
  }
  for (std::size_t k = 1; k < potentials.size(); ++k) {
    double d = 0.0;
    for (std::size_t i = 0; i < problem.size(); ++i) d = std::max(d, std::abs(potentials[k][i] - potentials[k - 1][i]));
    out.potential_drift.push_back(d);
  }
  out.u_inf = potentials.back();
  const auto [lo, hi] = std::minmax_element(out.u_inf.begin(), out.u_inf.end());
  out.min_u = *lo;
  out.degenerate = (*hi - *lo) <= eps;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    if (out.degenerate || out.u_inf[i] <= out.min_u + eps) out.sigma_set.push_back(i);
  }
  for (std::size_t k : order) {
    const auto& f = reports[k].density;
    double mass = 0.0;
    for (std::size_t i : out.sigma_set) mass += f[i] * f.weights()[i];
    out.mass_on_sigma.push_back(std::min(1.0, mass));
  }
  return out;
}

}  // namespace onsager::corpus
