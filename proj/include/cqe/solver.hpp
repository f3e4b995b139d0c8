#pragma once

// Circuit facade (netlist -> transformed circuit -> Hamiltonian), spectra,
// parameter sweeps and truncation convergence checks.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cqe/eigensolver.hpp"
#include "cqe/error.hpp"
#include "cqe/hamiltonian.hpp"

namespace cqe {

struct Spectrum {
  Eigen::VectorXd efreqs;     // Hz (E / h), ascending
  Eigen::VectorXd energies;   // J
  DenseMatrix evecs;          // columns, unit norm, phase fixed
  Eigen::VectorXd residuals;  // ‖H v - E v‖ in J
  double norm_estimate = 0.0; // ‖H‖₁ in J
};

/// Lowest n_eig eigenpairs. Two extra pairs are computed internally so that
/// degenerate clusters at the edge of the window are resolved together.
Spectrum diag(const SparseMatrix& h, int n_eig, const EigenOptions& options = {});

/// Identifies one element of the circuit: the edge and its position in the
/// edge's element list.
struct ElementHandle {
  NodePair nodes;
  int element = 0;
};

/// Copy of `spec` with the magnitude of one element replaced (same unit).
CircuitSpec with_element_value(const CircuitSpec& spec, const ElementHandle& handle, double magnitude);

class Circuit {
 public:
  explicit Circuit(CircuitSpec spec, TreeChoice tree = TreeChoice::Default, TransformOptions options = {});

  const CircuitSpec& spec() const { return spec_; }
  const TransformedCircuit& transformed() const { return *tc_; }
  std::shared_ptr<const TransformedCircuit> transformed_ptr() const { return tc_; }
  const TransformOptions& transform_options() const { return options_; }
  TreeChoice tree_choice() const { return tree_; }

  /// Structural warnings followed by warnings raised while choosing the basis.
  std::vector<std::string> warnings() const;

  void set_truncations(std::vector<int> truncations);
  bool has_truncations() const { return builder_ != nullptr; }
  const std::vector<int>& truncations() const;
  const HamiltonianBuilder& builder() const;

  /// External flux of a declared loop in units of Φ0.
  void set_flux(std::string_view loop, double flux);
  double flux(std::string_view loop) const;

  /// Charge offset of 1-based mode `mode` in units of 2e.
  void set_charge_offset(int mode, double offset);

  HamiltonianParams params() const;
  SparseMatrix hamiltonian() const { return hamiltonian(params()); }
  SparseMatrix hamiltonian(const HamiltonianParams& p) const;

  Spectrum diag(int n_eig) const { return diag(params(), n_eig); }
  Spectrum diag(const HamiltonianParams& p, int n_eig) const;

  EigenOptions eigen_options;

 private:
  void rebuild_basis();

  CircuitSpec spec_;
  TreeChoice tree_;
  TransformOptions options_;
  std::shared_ptr<const TransformedCircuit> tc_;
  std::vector<int> requested_;
  std::vector<std::string> basis_warnings_;
  std::shared_ptr<const HamiltonianBuilder> builder_;
};

enum class SweepKind { Flux, ChargeOffset, Element };

struct SweepTarget {
  SweepKind kind = SweepKind::Flux;
  std::string loop;       // Flux
  int mode = 0;           // ChargeOffset, 1-based
  ElementHandle element;  // Element

  static SweepTarget flux(std::string loop);
  static SweepTarget charge_offset(int mode);
  static SweepTarget element_value(ElementHandle handle);
};

/// Raised when one point of a sweep fails. Carries the columns computed
/// before the failure (columns from the failing index on are NaN).
class SweepError : public NumericalError {
 public:
  SweepError(const std::string& message, std::size_t index, Eigen::MatrixXd partial)
      : NumericalError(message), index_(index), partial_(std::move(partial)) {}
  std::size_t index() const noexcept { return index_; }
  const Eigen::MatrixXd& partial() const noexcept { return partial_; }

 private:
  std::size_t index_;
  Eigen::MatrixXd partial_;
};

struct ParallelFailure {
  std::size_t index = 0;
  std::string message;
};

/// Calls fn(j) for every j in [0, count) on up to `threads` workers
/// (0 = all hardware threads). Every index is attempted; the failure with the
/// smallest index is reported.
std::optional<ParallelFailure> parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Eigenfrequencies (Hz) with column j evaluated at values[j]. Flux and
/// charge-offset sweeps share the transformed circuit; element sweeps rebuild
/// the whole pipeline at every point. threads = 0 uses all hardware threads.
/// Every point is computed independently, so the result does not depend on
/// the thread count.
Eigen::MatrixXd sweep(const Circuit& circuit, const SweepTarget& target, std::span<const double> values, int n_eig,
                      int threads = 1);

struct ConvergenceReport {
  std::vector<std::vector<int>> schedule;
  Eigen::MatrixXd efreqs;      // n_eig x schedule size, Hz
  Eigen::MatrixXd rel_change;  // n_eig x schedule size; column 0 is zero
  std::vector<bool> converged; // per level, judged on the last step
  double tolerance = 0.0;
};

/// Re-diagonalizes at each truncation vector of `schedule`. The change of a
/// level between consecutive steps is measured relative to
/// max(|E_k|, E_{n-1} - E_0) so that levels near zero energy stay meaningful.
ConvergenceReport convergence_probe(const Circuit& circuit, int n_eig, const std::vector<std::vector<int>>& schedule,
                                    double tolerance = 1e-6);

}  // namespace cqe
