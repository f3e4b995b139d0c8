#pragma once

// Operators through which an external drive couples to the circuit, and
// their matrix elements between eigenstates. Drive amplitudes (c_d V_d or
// M I_d) are left out; they multiply the returned operators.

#include <span>

#include "cqe/solver.hpp"

namespace cqe {

enum class CouplingKind { Capacitive, Inductive };

/// Ordered node pair (i, j); either may be ground (0). The sign of the
/// operator follows e_ij = e_i - e_j.
struct CouplingNodes {
  int i = 0;
  int j = 0;
};

/// e_ijᵀ C⁻¹ R Q̃ (volts): the voltage between nodes i and j.
SparseMatrix capacitive_coupling_op(const HamiltonianBuilder& builder, CouplingNodes nodes,
                                    std::span<const double> charge_offsets);

/// (1/l_ij) e_ijᵀ S Φ̃ (amperes): the current through the inductor on edge
/// (i, j), without the external-flux offset.
SparseMatrix inductive_coupling_op(const HamiltonianBuilder& builder, CouplingNodes nodes);

SparseMatrix coupling_op(const Circuit& circuit, CouplingKind kind, CouplingNodes nodes);

/// Row vector e_ijᵀ C⁻¹ R over modes.
Eigen::RowVectorXd capacitive_mode_weights(const TransformedCircuit& tc, CouplingNodes nodes);

/// Row vector e_ijᵀ S over modes.
Eigen::RowVectorXd flux_mode_weights(const TransformedCircuit& tc, CouplingNodes nodes);

/// <m| op |n> with the eigenvector phase convention of the solver.
Complex matrix_element(const SparseMatrix& op, const Spectrum& spectrum, int m, int n);

}  // namespace cqe
