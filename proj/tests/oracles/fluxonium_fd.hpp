#pragma once

// Reference spectrum of a single-node fluxonium,
//   H = 4 E_C n² + E_L φ² / 2 - E_J cos(φ + φ_ext),
// from a second-order finite-difference grid in φ. Eigenvalues of the
// tridiagonal matrix come from Sturm-sequence bisection, and three grid
// spacings are combined by Richardson extrapolation (error O(h⁶)).
// Shares no code with the engine.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

struct FluxoniumParams {
  double ec = 3.6;    // GHz
  double el = 0.46;   // GHz
  double ej = 10.2;   // GHz
  double half_width = 6.0 * std::numbers::pi;  // grid spans [-w, w]
};

// Number of eigenvalues of the symmetric tridiagonal (d, off) below x.
inline int sturm_count(const std::vector<double>& d, double off, double x) {
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    q = d[i] - x - (i ? off * off / q : 0.0);
    if (q == 0.0) q = 1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

// Lowest `count` eigenvalues on an n-point grid, GHz.
inline std::vector<double> fluxonium_grid(const FluxoniumParams& p, double flux, int n, int count) {
  const double h = 2.0 * p.half_width / (n - 1);
  const double off = -4.0 * p.ec / (h * h);
  std::vector<double> d(static_cast<std::size_t>(n));
  double lo = 0.0;
  double hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -p.half_width + h * i;
    d[static_cast<std::size_t>(i)] = 8.0 * p.ec / (h * h) + 0.5 * p.el * x * x - p.ej * std::cos(x + 2.0 * std::numbers::pi * flux);
    lo = std::min(lo, d[static_cast<std::size_t>(i)] - 2.0 * std::abs(off));
    hi = std::max(hi, d[static_cast<std::size_t>(i)] + 2.0 * std::abs(off));
  }
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    double a = lo;
    double b = hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      if (sturm_count(d, off, mid) > k) b = mid; else a = mid;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

// Richardson-extrapolated lowest `count` eigenvalues, GHz.
inline std::vector<double> fluxonium_levels(const FluxoniumParams& p, double flux, int count = 4, int base = 4001) {
  const auto a = fluxonium_grid(p, flux, base, count);
  const auto b = fluxonium_grid(p, flux, 2 * base - 1, count);
  const auto c = fluxonium_grid(p, flux, 4 * base - 3, count);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double r1 = (4.0 * b[k] - a[k]) / 3.0;
    const double r2 = (4.0 * c[k] - b[k]) / 3.0;
    out[k] = (16.0 * r2 - r1) / 15.0;
  }
  return out;
}

}  // namespace oracle

namespace oracle {

// Solves the tridiagonal system (sub, diag, super) x = rhs by Gaussian
// elimination with partial pivoting (the dgtsv scheme: after a row swap
// `sub[i]` holds the second superdiagonal).
inline std::vector<double> tridiagonal_solve(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                                             std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(diag[i]) >= std::abs(sub[i])) {
      const double f = sub[i] / diag[i];
      diag[i + 1] -= f * sup[i];
      rhs[i + 1] -= f * rhs[i];
      sub[i] = 0.0;
    } else {
      const double f = diag[i] / sub[i];
      diag[i] = sub[i];
      const double t = diag[i + 1];
      diag[i + 1] = sup[i] - f * t;
      if (i + 2 < n) {
        sub[i] = sup[i + 1];
        sup[i + 1] = -f * sub[i];
      } else {
        sub[i] = 0.0;
      }
      sup[i] = t;
      const double r = rhs[i];
      rhs[i] = rhs[i + 1];
      rhs[i + 1] = r - f * rhs[i + 1];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    if (i + 1 < n) s -= sup[i] * x[i + 1];
    if (i + 2 < n) s -= sub[i] * x[i + 2];
    x[i] = s / diag[i];
  }
  return x;
}

struct GridState {
  std::vector<double> x;   // grid points
  std::vector<double> u;   // unit-norm eigenvector
  double energy = 0.0;     // GHz
};

// k-th eigenstate on an n-point grid by inverse iteration.
inline GridState fluxonium_state(const FluxoniumParams& p, double flux, int n, int k) {
  const double h = 2.0 * p.half_width / (n - 1);
  const double off = -4.0 * p.ec / (h * h);
  const auto levels = fluxonium_grid(p, flux, n, k + 1);
  GridState s;
  s.energy = levels[static_cast<std::size_t>(k)];
  std::vector<double> d(static_cast<std::size_t>(n));
  s.x.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = -p.half_width + h * i;
    s.x[static_cast<std::size_t>(i)] = x;
    d[static_cast<std::size_t>(i)] =
        8.0 * p.ec / (h * h) + 0.5 * p.el * x * x - p.ej * std::cos(x + 2.0 * std::numbers::pi * flux) -
        (s.energy + 1e-9 * std::max(1.0, std::abs(s.energy)));
  }
  std::vector<double> u(static_cast<std::size_t>(n), 1.0);
  for (int it = 0; it < 3; ++it) {
    u = tridiagonal_solve(std::vector<double>(static_cast<std::size_t>(n - 1), off), d,
                          std::vector<double>(static_cast<std::size_t>(n - 1), off), u);
    double norm = 0.0;
    for (double v : u) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
  }
  s.u = std::move(u);
  return s;
}

// |<a| φ |b>| on the grid.
inline double phase_element(const GridState& a, const GridState& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) s += a.u[i] * a.x[i] * b.u[i];
  return std::abs(s);
}

}  // namespace oracle
