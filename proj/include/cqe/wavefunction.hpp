#pragma once

// Eigenvectors evaluated on grids of mode phases.

#include <variant>
#include <vector>

#include "cqe/hamiltonian.hpp"

namespace cqe {

/// Physicists' Hermite polynomial H_n(x). Evaluated through the normalized
/// Hermite functions and rescaled, so it is finite wherever the true value
/// fits in a double.
double hermite_eval(int n, double x);

/// Normalized Hermite function ψ_n(y) = H_n(y) e^{-y²/2} / sqrt(2^n n! sqrt(π)),
/// via the weighted three-term recurrence with exponent tracking.
double hermite_function(int n, double y);

/// ψ_0..ψ_{count-1} at y.
std::vector<double> hermite_functions(int count, double y);

/// Per mode: a fixed phase or a 1-D list of phases (radians).
using PhaseAxis = std::variant<double, std::vector<double>>;

struct PhaseGrid {
  std::vector<PhaseAxis> axes;

  /// Lengths of the array axes in mode order (scalar axes are omitted).
  std::vector<int> shape() const;
  long size() const;
};

struct GridValues {
  std::vector<int> shape;       // as PhaseGrid::shape
  std::vector<Complex> values;  // row-major, first array axis slowest
};

/// Phase representation of one mode basis state, normalized so that
/// ∫|f|² dφ = 1 over the real line (harmonic) or one period (charge).
/// `origin` is the centre of a harmonic basis (HamiltonianBuilder::harmonic_origin).
Complex mode_basis_function(const TransformedCircuit& tc, const ModeBasis& basis, int mode, int level, double phase,
                            double origin = 0.0);

/// <φ_1 .. φ_N | ψ> for an eigenvector in the product basis. Per-mode factor
/// tables are built once and contracted mode by mode. `origin` holds the
/// harmonic basis centres; empty means all zero.
GridValues eig_phase_coord(const Eigen::Ref<const Eigen::VectorXcd>& evec, const TransformedCircuit& tc,
                           const ModeBasis& basis, const PhaseGrid& grid, const Eigen::VectorXd& origin = {});

}  // namespace cqe
