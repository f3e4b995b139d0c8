#pragma once

// Truncated Hamiltonian of a transformed circuit in the product basis of
// Fock states (harmonic modes) and charge states (charge modes).

#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cqe/operators.hpp"
#include "cqe/transform.hpp"

namespace cqe {

struct ModeBasis {
  std::vector<int> truncations;     // per mode, harmonic modes first
  std::vector<double> charge_offsets;  // per charge mode, units of 2e

  long dim() const;
};

/// Validates and normalizes a truncation request: even charge truncations
/// are rounded up to odd and frozen charge modes are fixed to 1 (each with a
/// warning). `offsets` maps 1-based mode numbers to n_g.
ModeBasis make_basis(const TransformedCircuit& tc, std::vector<int> truncations,
                     const std::map<int, double>& offsets, std::vector<std::string>* warnings = nullptr);

struct HamiltonianParams {
  std::vector<double> loop_phases;        // φ_ext per declared loop, radians
  std::vector<double> charge_offsets;     // per charge mode, units of 2e
  std::vector<double> junction_energies;  // per inductive branch (J); ignored for inductors
};

/// Parameters taken from the circuit description (loop fluxes, charge
/// offsets, Josephson energies).
HamiltonianParams default_params(const TransformedCircuit& tc, const CircuitSpec& spec, const ModeBasis& basis);

/// Precomputes the flux-, offset- and E_J-independent parts of the
/// Hamiltonian so that parameter sweeps only recombine them.
class HamiltonianBuilder {
 public:
  HamiltonianBuilder(std::shared_ptr<const TransformedCircuit> tc, ModeBasis basis);

  const TransformedCircuit& circuit() const { return *tc_; }

  const ModeBasis& basis() const { return basis_; }
  long dim() const { return basis_.dim(); }

  /// H in joules.
  SparseMatrix assemble(const HamiltonianParams& params) const;

  /// Lifted ladder/charge operators of one mode.
  SparseMatrix mode_charge(int mode, std::span<const double> charge_offsets) const;  // C
  SparseMatrix mode_flux(int mode) const;                                             // Wb, harmonic only

  /// exp(i s (2π/Φ0) w̃_kᵀ Φ̃) for junction branch k with s = 1 or 1/2.
  /// For s = 1/2 an odd charge power has no representation on the integer
  /// charge lattice and the result is the zero operator.
  SparseMatrix junction_exponential(int branch, bool half) const;

  /// Σ_m w̃_km Φ̃_m over harmonic modes (the branch flux without offset).
  SparseMatrix branch_flux(int branch) const;

  /// Centre of each harmonic Fock basis in phase units: the minimum of the
  /// inductive energy including the flux offsets on inductors. Harmonic
  /// operators act on the displacement from this point, which keeps the
  /// truncated spectrum independent of how loop fluxes are distributed.
  Eigen::VectorXd harmonic_origin(const HamiltonianParams& params) const;

  /// Σ_m w̃_km times the harmonic origin: the phase a junction cosine picks
  /// up from the basis shift.
  double junction_shift(int branch, const Eigen::VectorXd& origin) const;

 private:
  std::shared_ptr<const TransformedCircuit> tc_;
  ModeBasis basis_;
  std::vector<int> dims_;
  Eigen::VectorXd harmonic_diag_;  // Σ ħω_m n_m
  std::vector<SparseMatrix> junction_ops_;  // indexed by branch, empty for inductors
};

SparseMatrix assemble_hamiltonian(const TransformedCircuit& tc, const ModeBasis& basis, const HamiltonianParams& params);

/// Writes row,col,real,imag lines of the nonzero entries (in hertz).
void write_triplets_csv(std::ostream& out, const SparseMatrix& h);

}  // namespace cqe
