#include "onsager/kinetics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <sstream>

namespace onsager::kinetics {

namespace {

// ---------------------------------------------------------------------------
// Spectral hierarchy

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Nonlinear part b j y_1 (y_{j-1} - y_{j+1}) with y_0 = 1, y_{J+1} = 0.
void nonlinear(std::span<const double> y, double b, std::span<double> out) {
  const std::size_t J = y.size();
  const double y1 = y[0];
  for (std::size_t j = 1; j <= J; ++j) {
    const double prev = (j == 1) ? 1.0 : y[j - 2];
    const double next = (j == J) ? 0.0 : y[j];
    out[j - 1] = b * static_cast<double>(j) * y1 * (prev - next);
  }
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5 = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4 = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                                       -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

class LawsonDopri {
 public:
  LawsonDopri(std::size_t J, double b) : J_(J), b_(b), k_(7, std::vector<double>(J)), stage_(J) {
    rate_.resize(J);
    for (std::size_t j = 1; j <= J; ++j) rate_[j - 1] = -4.0 * static_cast<double>(j * j);
  }

  // One trial step of size h from y (whose nonlinear term is k_[0]).
  // Writes the 5th-order solution into y_new and returns the scaled error.
  double step(std::span<const double> y, double h, double tol, std::vector<double>& y_new) {
    for (std::size_t s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < J_; ++i) {
        double acc = std::exp(rate_[i] * kC[s] * h) * y[i];
        for (std::size_t q = 0; q < s; ++q) {
          if (kA[s][q] == 0.0) continue;
          acc += h * kA[s][q] * std::exp(rate_[i] * (kC[s] - kC[q]) * h) * k_[q][i];
        }
        stage_[i] = acc;
      }
      if (s == 6) y_new = stage_;  // row 7 of A is b5: FSAL
      nonlinear(stage_, b_, k_[s]);
    }
    double err = 0.0;
    for (std::size_t i = 0; i < J_; ++i) {
      double e = 0.0;
      for (std::size_t q = 0; q < 7; ++q) {
        const double w = kB5[q] - kB4[q];
        if (w == 0.0) continue;
        e += h * w * std::exp(rate_[i] * (1.0 - kC[q]) * h) * k_[q][i];
      }
      const double scale = tol + tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err = std::max(err, std::abs(e) / scale);
    }
    return err;
  }

  void prime(std::span<const double> y) { nonlinear(y, b_, k_[0]); }
  void accept() { std::swap(k_[0], k_[6]); }

 private:
  std::size_t J_;
  double b_;
  std::vector<double> rate_;
  std::vector<std::vector<double>> k_;
  std::vector<double> stage_;
};

// ---------------------------------------------------------------------------
// Pseudo-spectral circle operator

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

using Complex = std::complex<double>;

class PseudoSpectral {
 public:
  explicit PseudoSpectral(const CircleGrid& grid) : n_(grid.size()), modes_(grid.size() / 2 + 1) {
    if (n_ % 2 != 0) throw InputError("pseudo-spectral PDE: grid size must be even");
    real_.reset(fftw_alloc_real(n_));
    spec_.reset(fftw_alloc_complex(modes_));
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_.get(), spec_.get(), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_.get(), real_.get(), FFTW_ESTIMATE);
    sin2_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) sin2_[i] = std::sin(2.0 * grid.node(i));
  }
  PseudoSpectral(const PseudoSpectral&) = delete;
  PseudoSpectral& operator=(const PseudoSpectral&) = delete;
  ~PseudoSpectral() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  std::size_t size() const { return n_; }
  std::size_t modes() const { return modes_; }

  std::vector<Complex> forward(std::span<const double> f) {
    std::copy(f.begin(), f.end(), real_.get());
    fftw_execute(forward_);
    std::vector<Complex> out(modes_);
    for (std::size_t k = 0; k < modes_; ++k) out[k] = {spec_.get()[k][0], spec_.get()[k][1]};
    return out;
  }

  std::vector<double> backward(std::span<const Complex> c) {
    for (std::size_t k = 0; k < modes_; ++k) {
      spec_.get()[k][0] = c[k].real();
      spec_.get()[k][1] = c[k].imag();
    }
    fftw_execute(backward_);
    std::vector<double> out(real_.get(), real_.get() + n_);
    const double inv = 1.0 / static_cast<double>(n_);
    for (double& v : out) v *= inv;
    return out;
  }

  // y_1 = int f cos 2theta dtheta from the Fourier coefficients of f.
  double first_cosine_mode(std::span<const Complex> fhat) const {
    return kTwoPi / static_cast<double>(n_) * fhat[2].real();
  }

  // Fourier coefficients of b y_1 (f sin 2theta)'.
  std::vector<Complex> advection(std::span<const Complex> fhat, double b) {
    const double y1 = first_cosine_mode(fhat);
    std::vector<double> f = backward(fhat);
    for (std::size_t i = 0; i < n_; ++i) f[i] *= sin2_[i];
    std::vector<Complex> q = forward(f);
    for (std::size_t k = 0; k < modes_; ++k) q[k] *= Complex(0.0, b * y1 * static_cast<double>(k));
    q[modes_ - 1] = 0.0;  // Nyquist has no first derivative
    return q;
  }

 private:
  std::size_t n_;
  std::size_t modes_;
  std::unique_ptr<double, FftwFree> real_;
  std::unique_ptr<fftw_complex, FftwFree> spec_;
  fftw_plan forward_{};
  fftw_plan backward_{};
  std::vector<double> sin2_;
};

struct Reconstruction {
  std::vector<double> f;
  std::vector<double> df;
};

Reconstruction reconstruct_with_derivative(std::span<const double> y, const CircleGrid& grid) {
  Reconstruction out{std::vector<double>(grid.size(), 1.0 / kTwoPi), std::vector<double>(grid.size(), 0.0)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double theta = grid.node(i);
    double acc = 0.0;
    double dacc = 0.0;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const double w = 2.0 * static_cast<double>(j);
      acc += y[j - 1] * std::cos(w * theta);
      dacc -= w * y[j - 1] * std::sin(w * theta);
    }
    out.f[i] += acc / kPi;
    out.df[i] = dacc / kPi;
  }
  return out;
}

void check_reconstruction(std::span<const double> f, const char* where) {
  const double fmin = *std::min_element(f.begin(), f.end());
  if (fmin < -kNegativeTolerance) {
    std::ostringstream os;
    os << where << ": reconstructed density reaches " << fmin << " < -" << kNegativeTolerance;
    throw InputError(os.str());
  }
}

double entropy_term(double f) { return f > 0.0 ? f * std::log(f) : 0.0; }

}  // namespace

GridDensity PdeState::density() const { return GridDensity(f, grid.weights()); }

std::vector<double> ode_rhs(std::span<const double> y, double b) {
  if (y.size() < 2) throw InputError("ode_rhs: need at least two modes");
  std::vector<double> out(y.size());
  nonlinear(y, b, out);
  for (std::size_t j = 1; j <= y.size(); ++j) out[j - 1] -= 4.0 * static_cast<double>(j * j) * y[j - 1];
  return out;
}

SpectralTrajectory integrate_spectral(std::span<const double> y0, double b, double t_end, double tol,
                                      const SpectralOptions& options) {
  if (y0.size() < 2) throw InputError("integrate_spectral: need at least two modes");
  if (!(t_end > 0.0)) throw InputError("integrate_spectral: t_end must be positive");
  if (!(tol > 0.0)) throw InputError("integrate_spectral: tol must be positive");
  if (options.samples == 0) throw InputError("integrate_spectral: need at least one sample interval");

  const std::size_t J = y0.size();
  SpectralTrajectory traj;
  std::vector<double> y(y0.begin(), y0.end());
  traj.samples.push_back({y, b, 0.0});

  LawsonDopri stepper(J, b);
  stepper.prime(y);
  std::vector<double> y_new(J);
  double t = 0.0;
  double h = std::min(options.initial_step, t_end);
  std::size_t steps = 0;

  for (std::size_t s = 1; s <= options.samples; ++s) {
    const double t_sample = (s == options.samples) ? t_end
                                                   : t_end * static_cast<double>(s) /
                                                         static_cast<double>(options.samples);
    while (t < t_sample) {
      if (++steps > options.max_steps) throw NumericalError("integrate_spectral: step budget exhausted");
      const bool clipped = t + h >= t_sample;
      const double h_try = clipped ? t_sample - t : h;
      const double err = stepper.step(y, h_try, tol, y_new);
      if (err <= 1.0 && std::isfinite(err)) {
        t = clipped ? t_sample : t + h_try;
        y.swap(y_new);
        stepper.accept();
        ++traj.accepted_steps;
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        // A step shortened to land on a sample time says nothing about h.
        if (!clipped || h_try >= h) h = h_try * std::clamp(grow, 0.2, 5.0);
      } else {
        ++traj.rejected_steps;
        const double shrink = std::isfinite(err) ? 0.9 * std::pow(err, -0.2) : 0.1;
        h = h_try * std::clamp(shrink, 0.1, 0.9);
        if (h < options.min_step) {
          std::ostringstream os;
          os << "integrate_spectral: step size underflow at t = " << t
             << " (stiff system; reduce the number of modes J)";
          throw NumericalError(os.str());
        }
      }
    }
    traj.samples.push_back({y, b, t_sample});
  }
  traj.final_rhs_norm = max_abs(ode_rhs(y, b));
  return traj;
}

std::vector<double> pde_rhs(const PdeState& state) {
  if (state.f.size() != state.grid.size()) throw InputError("pde_rhs: state does not match its grid");
  PseudoSpectral op(state.grid);
  const auto fhat = op.forward(state.f);
  auto rhs = op.advection(fhat, state.b);
  for (std::size_t k = 0; k < op.modes(); ++k) rhs[k] -= static_cast<double>(k * k) * fhat[k];
  return op.backward(rhs);
}

std::vector<PdeState> integrate_pde(const PdeState& state0, double t_end, double dt, const PdeOptions& options) {
  const CircleGrid& grid = state0.grid;
  if (state0.f.size() != grid.size()) throw InputError("integrate_pde: state does not match its grid");
  if (!(t_end > 0.0) || !(dt > 0.0)) throw InputError("integrate_pde: t_end and dt must be positive");
  if (options.samples == 0) throw InputError("integrate_pde: need at least one sample interval");
  const double n_half = 0.5 * static_cast<double>(grid.size());
  if (dt * std::abs(state0.b) * n_half > 2.8) {
    std::ostringstream os;
    os << "integrate_pde: dt = " << dt << " exceeds the advective stability bound "
       << 2.8 / (std::abs(state0.b) * n_half);
    throw InputError(os.str());
  }

  PseudoSpectral op(grid);
  const std::size_t M = op.modes();
  const double b = state0.b;
  const double interval = t_end / static_cast<double>(options.samples);
  const auto substeps = static_cast<std::size_t>(std::ceil(interval / dt - 1e-9));
  const double h = interval / static_cast<double>(substeps);

  std::vector<double> e_half(M);
  std::vector<double> e_full(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double kk = static_cast<double>(k * k);
    e_half[k] = std::exp(-kk * 0.5 * h);
    e_full[k] = std::exp(-kk * h);
  }

  const double max0 = max_abs(state0.f);
  std::vector<PdeState> out;
  out.push_back(state0);
  std::vector<Complex> fhat = op.forward(state0.f);
  std::vector<Complex> tmp(M);

  for (std::size_t s = 1; s <= options.samples; ++s) {
    for (std::size_t step = 0; step < substeps; ++step) {
      const auto k1 = op.advection(fhat, b);
      for (std::size_t k = 0; k < M; ++k) tmp[k] = e_half[k] * (fhat[k] + 0.5 * h * k1[k]);
      const auto k2 = op.advection(tmp, b);
      for (std::size_t k = 0; k < M; ++k) tmp[k] = e_half[k] * fhat[k] + 0.5 * h * k2[k];
      const auto k3 = op.advection(tmp, b);
      for (std::size_t k = 0; k < M; ++k) tmp[k] = e_full[k] * fhat[k] + h * e_half[k] * k3[k];
      const auto k4 = op.advection(tmp, b);
      for (std::size_t k = 0; k < M; ++k) {
        fhat[k] = e_full[k] * fhat[k] +
                  h / 6.0 * (e_full[k] * k1[k] + 2.0 * e_half[k] * (k2[k] + k3[k]) + k4[k]);
      }
    }
    PdeState snap{grid, op.backward(fhat), b, state0.t + interval * static_cast<double>(s)};
    if (s == options.samples) snap.t = state0.t + t_end;
    const double m = max_abs(snap.f);
    if (!std::isfinite(m) || m > options.growth_limit * max0) {
      throw NumericalError("integrate_pde: instability detected (norm growth); reduce dt");
    }
    const double fmin = *std::min_element(snap.f.begin(), snap.f.end());
    if (fmin < -kNegativeTolerance) throw NumericalError("integrate_pde: density went negative; reduce dt");
    const double mass = periodic_quadrature(snap.f, grid);
    if (std::abs(mass - periodic_quadrature(state0.f, grid)) > 1e-8) {
      throw NumericalError("integrate_pde: mass drift beyond 1e-8");
    }
    out.push_back(std::move(snap));
  }
  return out;
}

CircleGrid evaluation_grid(std::size_t modes) { return CircleGrid(std::max<std::size_t>(kDefaultGridN, 8 * modes)); }

double free_energy_spectral(std::span<const double> y, double b) {
  if (y.empty()) return std::log(1.0 / kTwoPi);
  const CircleGrid grid = evaluation_grid(y.size());
  const auto rec = reconstruct_with_derivative(y, grid);
  check_reconstruction(rec.f, "free_energy_spectral");
  double entropy = 0.0;
  for (double f : rec.f) entropy += entropy_term(f);
  entropy *= grid.weight();
  // int f Kf = (y_1 / 2) int f cos 2theta = y_1^2 / 2.
  return entropy - 0.25 * b * y[0] * y[0];
}

double dissipation_rate(std::span<const double> y, double b) {
  if (y.empty()) return 0.0;
  const CircleGrid grid = evaluation_grid(y.size());
  const auto rec = reconstruct_with_derivative(y, grid);
  check_reconstruction(rec.f, "dissipation_rate");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = rec.f[i];
    if (f <= 0.0) continue;
    // f (log f - b Kf)' = f' + b y_1 f sin 2theta
    const double flux = rec.df[i] + b * y[0] * f * std::sin(2.0 * grid.node(i));
    acc += flux * flux / f;
  }
  return -acc * grid.weight();
}

double free_energy_grid(std::span<const double> f, const CircleGrid& grid, double b) {
  if (f.size() != grid.size()) throw InputError("free_energy_grid: density does not match grid");
  check_reconstruction(f, "free_energy_grid");
  double entropy = 0.0;
  double y1 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    entropy += entropy_term(f[i]);
    y1 += f[i] * std::cos(2.0 * grid.node(i));
  }
  entropy *= grid.weight();
  y1 *= grid.weight();
  return entropy - 0.25 * b * y1 * y1;
}

}  // namespace onsager::kinetics
