#include "onsager/maier_saupe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace onsager::ms {

namespace {

// rho_k = I_k(x) / I_{k-1}(x) satisfies rho_k = 1 / (2k/x + rho_{k+1});
// running it downward converges onto the minimal solution. The seed uses
// the Amos-type estimate x / (k + sqrt(k^2 + x^2)).
std::vector<double> bessel_ratios(double x, std::size_t J) {
  std::vector<double> rho(J + 1, 0.0);
  if (x == 0.0) return rho;
  const std::size_t start = std::max<std::size_t>(J, static_cast<std::size_t>(2.0 * x)) + 60;
  double next = x / (static_cast<double>(start + 1) +
                     std::sqrt(static_cast<double>((start + 1) * (start + 1)) + x * x));
  for (std::size_t k = start; k >= 1; --k) {
    const double cur = 1.0 / (2.0 * static_cast<double>(k) / x + next);
    if (k <= J) rho[k] = cur;
    next = cur;
  }
  return rho;
}

void require_finite(double r, const char* where) {
  if (!std::isfinite(r)) throw InputError(std::string(where) + ": r must be finite");
}

double phi(double r, double b) { return g1(r) - 2.0 * r / b; }

double bisect_root(double lo, double hi, double b) {
  double flo = phi(lo, b);
  for (int it = 0; it < 200 && hi - lo > kRootTolerance * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = phi(mid, b);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Newton on phi with d g_1/dr = (1 + g_2)/2 - g_1^2, kept inside [lo, hi].
double polish_root(double r, double lo, double hi, double b) {
  for (int it = 0; it < 8; ++it) {
    auto g = g_coeffs(r, 2);
    const double f = g[0] - 2.0 * r / b;
    const double df = 0.5 * (1.0 + g[1]) - g[0] * g[0] - 2.0 / b;
    if (df == 0.0) break;
    const double next = r - f / df;
    if (!(next > lo && next < hi)) break;
    if (std::abs(next - r) <= 1e-16 * std::max(1.0, r)) {
      r = next;
      break;
    }
    r = next;
  }
  return r;
}

}  // namespace

double log_partition_Z(double r, const CircleGrid& grid) {
  require_finite(r, "partition_Z");
  const double a = std::abs(r);
  double acc = 0.0;
  for (double theta : grid.nodes()) acc += std::exp(r * std::cos(2.0 * theta) - a);
  return a + std::log(acc * grid.weight());
}

double partition_Z(double r, const CircleGrid& grid) {
  require_finite(r, "partition_Z");
  if (std::abs(r) > kMaxExponent) {
    std::ostringstream os;
    os << "partition_Z: |r| = " << std::abs(r) << " exceeds the exponent guard " << kMaxExponent;
    throw NumericalError(os.str());
  }
  return std::exp(log_partition_Z(r, grid));
}

std::vector<double> g_coeffs(double r, std::size_t J) {
  require_finite(r, "g_coeffs");
  if (J < 2) throw InputError("g_coeffs: need J >= 2");
  const auto rho = bessel_ratios(std::abs(r), J);
  std::vector<double> g(J);
  double acc = 1.0;
  for (std::size_t j = 1; j <= J; ++j) {
    acc *= rho[j];
    g[j - 1] = (r < 0.0 && (j % 2 == 1)) ? -acc : acc;
  }
  return g;
}

double g1(double r) { return g_coeffs(r, 2)[0]; }

std::vector<double> g_coeffs_quadrature(double r, std::size_t J, const CircleGrid& grid) {
  require_finite(r, "g_coeffs_quadrature");
  if (std::abs(r) > kMaxExponent) throw NumericalError("g_coeffs_quadrature: exponent guard tripped");
  const double a = std::abs(r);
  std::vector<double> weight(grid.size());
  double z = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    weight[i] = std::exp(r * std::cos(2.0 * grid.node(i)) - a);
    z += weight[i];
  }
  std::vector<double> g(J);
  for (std::size_t j = 1; j <= J; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      acc += weight[i] * std::cos(2.0 * static_cast<double>(j) * grid.node(i));
    }
    g[j - 1] = acc / z;
  }
  return g;
}

double recursion_check(std::span<const double> g, double r) {
  if (r == 0.0) throw InputError("recursion_check: recursion is undefined at r = 0");
  if (g.size() < 2) throw InputError("recursion_check: need at least g_1 and g_2");
  double defect = 0.0;
  // j runs over 1..J-1; g[j-1] holds g_j.
  for (std::size_t j = 1; j < g.size(); ++j) {
    const double prev = (j == 1) ? 1.0 : g[j - 2];
    const double predicted = prev - (2.0 * static_cast<double>(j) / r) * g[j - 1];
    defect = std::max(defect, std::abs(g[j] - predicted));
  }
  return defect;
}

std::vector<double> solve_r_of_b(double b) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("solve_r_of_b: b must be a finite nonnegative number");
  std::vector<double> roots{0.0};
  if (b == 0.0) return roots;

  // g_1 < 1 forces any root below b/2; the window is padded.
  const double r_max = std::max(5.0, 2.0 * b);
  constexpr int kScan = 200;

  // phi'(0) = 1/2 - 2/b, so for b > 4 phi is positive just right of 0.
  // Start the scan from a point where that sign is visible numerically.
  double lo = r_max / kScan;
  double flo = phi(lo, b);
  if (b > kCriticalIntensity && !(flo > 0.0)) {
    double probe = lo;
    for (int i = 0; i < 60 && !(phi(probe, b) > 0.0); ++i) probe *= 0.5;
    if (phi(probe, b) > 0.0) {
      roots.push_back(polish_root(bisect_root(probe, lo, b), probe, lo, b));
    }
  }
  for (int k = 2; k <= kScan; ++k) {
    const double hi = r_max * k / kScan;
    const double fhi = phi(hi, b);
    if ((flo > 0.0 && fhi <= 0.0) || (flo < 0.0 && fhi >= 0.0)) {
      roots.push_back(polish_root(bisect_root(lo, hi, b), lo, hi, b));
    }
    lo = hi;
    flo = fhi;
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-9; }),
              roots.end());
  return roots;
}

double nematic_r(double b) {
  if (!(b > kCriticalIntensity)) throw InputError("nematic_r: the nematic branch exists only for b > 4");
  const auto roots = solve_r_of_b(b);
  if (roots.size() < 2) throw NumericalError("nematic_r: no positive root found");
  return roots.back();
}

double b_of_r(double r) {
  if (!(r > 0.0)) throw InputError("b_of_r: r must be positive");
  return 2.0 * r / g1(r);
}

double db_dr(double r) {
  if (!(r > 0.0)) throw InputError("db_dr: r must be positive");
  const auto g = g_coeffs(r, 2);
  const double b = 2.0 * r / g[0];
  return b * b / (2.0 * r) * (g[0] * g[0] - g[1]);
}

FourierDensity maier_saupe_potential(const FourierDensity& y) {
  FourierDensity out;
  out.coeffs.assign(y.coeffs.size(), 0.0);
  if (!y.coeffs.empty()) out.coeffs[0] = 0.5 * y.coeffs[0];
  return out;
}

std::vector<BranchPoint> branch_continuation(double b_min, double b_max, std::size_t steps, std::size_t J) {
  if (!(b_min > kCriticalIntensity)) throw InputError("branch_continuation: b_min must exceed 4");
  if (!(b_max > b_min)) throw InputError("branch_continuation: need b_min < b_max");
  if (steps < 2) throw InputError("branch_continuation: need at least 2 steps");
  std::vector<BranchPoint> out;
  out.reserve(steps);
  double r_prev = nematic_r(b_min);
  for (std::size_t k = 0; k < steps; ++k) {
    const double b = (k + 1 == steps) ? b_max
                                      : b_min + (b_max - b_min) * static_cast<double>(k) /
                                                    static_cast<double>(steps - 1);
    double r = r_prev;
    if (k > 0) {
      // Bracket outward from the previous root: phi > 0 below r(b), < 0 above.
      double lo = r_prev;
      double hi = r_prev;
      while (phi(lo, b) <= 0.0 && lo > 1e-12) lo *= 0.5;
      double step = std::max(0.1, 0.1 * r_prev);
      while (phi(hi, b) > 0.0) {
        hi += step;
        step *= 2.0;
      }
      r = polish_root(bisect_root(lo, hi, b), lo, hi, b);
    }
    BranchPoint p;
    p.b = b;
    p.r = r;
    p.g = g_coeffs(r, J);
    p.dbdr = db_dr(r);
    out.push_back(std::move(p));
    r_prev = r;
  }
  return out;
}

GridDensity density(double r, const CircleGrid& grid) {
  require_finite(r, "density");
  const double a = std::abs(r);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = std::exp(r * std::cos(2.0 * grid.node(i)) - a);
  return GridDensity::normalized(std::move(v), grid.weights());
}

GridDensity equilibrium_density(double b, const CircleGrid& grid) {
  if (!(b > kCriticalIntensity)) return GridDensity::uniform(grid.weights());
  return density(nematic_r(b), grid);
}

double zero_temp_mass(double b, double halfwidth, const CircleGrid& grid) {
  if (!(b > kCriticalIntensity)) throw InputError("zero_temp_mass: b must exceed 4");
  const GridDensity g = equilibrium_density(b, grid);
  const double centers[] = {0.0, kPi};
  return mass_within(g, grid, centers, halfwidth);
}

}  // namespace onsager::ms
