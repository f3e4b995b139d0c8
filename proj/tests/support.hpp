#pragma once

// Shared helpers for the test executables: fixture loading, tolerances and
// hand-rolled random generators for property tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cqe/netlist.hpp"
#include "cqe/solver.hpp"

namespace support {

inline std::string fixture(const std::string& name) { return std::string(CQE_FIXTURE_DIR) + "/" + name; }

inline cqe::CircuitSpec load_spec(const std::string& name) { return cqe::load_netlist(fixture(name)); }

inline cqe::Circuit load(const std::string& name, cqe::TreeChoice tree = cqe::TreeChoice::Default) {
  return cqe::Circuit(load_spec(name), tree);
}

inline double rel_diff(double a, double b, double floor = 0.0) {
  const double den = std::max({std::abs(a), std::abs(b), floor});
  return den == 0.0 ? 0.0 : std::abs(a - b) / den;
}

/// Largest relative difference between two spectra of equal length.
inline double max_rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 0.0) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) worst = std::max(worst, rel_diff(a(k), b(k), floor));
  return worst;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

/// Deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return rng_; }

  Eigen::MatrixXcd hermitian(int n) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = {uniform(-1, 1), uniform(-1, 1)};
    return (m + m.adjoint()) / 2.0;
  }

 private:
  std::mt19937_64 rng_;
};

/// Random netlist text: every node gets a capacitor to ground so the
/// capacitance matrix is regular; extra edges carry capacitors, inductors
/// and junctions. No loops are declared and no inductive cycles are formed
/// (each extra inductive element closes onto a fresh pair of nodes).
inline std::string random_netlist(Gen& g, int nodes) {
  std::ostringstream s;
  s << "[settings]\n";
  s << "temp = " << g.uniform(0.01, 0.1) << "\n";
  s << "[elements]\n";
  std::vector<int> component(static_cast<std::size_t>(nodes) + 1);
  for (int i = 0; i <= nodes; ++i) component[static_cast<std::size_t>(i)] = i;
  auto find = [&](int x) {
    while (component[static_cast<std::size_t>(x)] != x) x = component[static_cast<std::size_t>(x)];
    return x;
  };
  for (int i = 1; i <= nodes; ++i) {
    s << "(0," << i << "): C " << g.uniform(0.3, 3.0) << " GHz";
    if (find(0) != find(i)) {
      if (g.coin(0.5))
        s << "; JJ " << g.uniform(2.0, 15.0) << " GHz";
      else
        s << "; L " << g.uniform(0.2, 2.0) << " GHz";
      component[static_cast<std::size_t>(find(i))] = find(0);
    }
    s << "\n";
  }
  for (int i = 1; i <= nodes; ++i)
    for (int j = i + 1; j <= nodes; ++j) {
      if (!g.coin(0.6)) continue;
      s << "(" << i << "," << j << "): C " << g.uniform(0.3, 3.0) << " GHz\n";
    }
  return s.str();
}

}  // namespace support
