#pragma once

// Canonical change of node coordinates that splits the circuit into
// harmonic modes (diagonal LC part) and charge modes (no quadratic
// potential), followed by a lattice rescaling of the charge block so that
// junction charge shifts are integers.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqe/topology.hpp"

namespace cqe {

enum class ModeKind { Harmonic, Charge };

struct ModePartition {
  int n_harmonic = 0;
  int n_charge = 0;
  Eigen::VectorXd omega;      // rad/s, harmonic modes, highest frequency first
  Eigen::VectorXd impedance;  // ohm-like scale of each harmonic coordinate
  std::vector<bool> frozen;   // per charge mode: not coupled to any junction

  int size() const { return n_harmonic + n_charge; }
  ModeKind kind(int mode) const { return mode < n_harmonic ? ModeKind::Harmonic : ModeKind::Charge; }
};

struct TransformOptions {
  double zero_tolerance = 1e-11;   // singular value / max below this is a charge mode
  double rank_tolerance = 1e-9;    // pivot selection for the charge lattice
  double condition_limit = 1e12;   // capacitance matrix condition number
  /// Extra positive rescaling of the harmonic coordinates on top of the
  /// default normalization. Observables must not depend on it.
  std::optional<Eigen::VectorXd> harmonic_rescale;
};

struct FirstTransformation {
  Eigen::MatrixXd S1;
  Eigen::MatrixXd R1;
  ModePartition partition;
  Eigen::VectorXd singular_values;  // in mode order
};

/// Normal-mode step. Harmonic columns are normalized so that the largest
/// junction prefactor of each mode is +1 (falling back to inductors, then to
/// the largest entry of the column); charge columns keep unit scale.
FirstTransformation first_transformation(const Eigen::MatrixXd& C, const Eigen::MatrixXd& Lstar,
                                         const std::vector<InductiveBranch>& branches,
                                         const TransformOptions& options = {});

struct SecondTransformation {
  Eigen::MatrixXd S2;
  Eigen::MatrixXd R2;
  std::vector<int> pivots;   // junction branch index per non-frozen charge mode
  std::vector<bool> frozen;  // per charge mode
};

/// Charge-lattice step acting on the charge block only.
SecondTransformation second_transformation(const FirstTransformation& first,
                                           const std::vector<InductiveBranch>& branches,
                                           const TransformOptions& options = {});

struct JunctionPrefactors {
  int branch = 0;
  Eigen::VectorXd phase_zp;  // per harmonic mode: (2π/Φ0) w^ha sqrt(ħZ/2), signed
  std::vector<int> charge_powers;  // per charge mode
};

struct TransformedCircuit {
  CircuitMatrices matrices;
  Eigen::MatrixXd S;
  Eigen::MatrixXd R;
  Eigen::MatrixXd Cinv_tilde;    // Rᵀ C⁻¹ R
  Eigen::MatrixXd Lstar_tilde;   // Sᵀ L* S
  Eigen::MatrixXd wtilde;        // branches x modes, rows w̃_kᵀ = w_kᵀ S
  ModePartition partition;
  std::vector<int> pivots;
  std::vector<std::string> warnings;

  int modes() const { return partition.size(); }
  /// (C̃⁻¹) restricted to the charge block.
  Eigen::MatrixXd charge_inverse_capacitance() const;
  /// Per-mode zero-point phase scale (2π/Φ0) sqrt(ħZ_m/2) of harmonic modes.
  Eigen::VectorXd phase_zero_point() const;
};

/// Applies S, R to the circuit matrices and verifies the block structure.
TransformedCircuit transform_circuit(CircuitMatrices matrices, const TransformOptions& options = {});

std::vector<JunctionPrefactors> junction_cosine_prefactors(const TransformedCircuit& tc);

}  // namespace cqe
