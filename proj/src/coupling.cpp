#include "cqe/coupling.hpp"

#include <cmath>

#include "cqe/error.hpp"

namespace cqe {

namespace {

Eigen::VectorXd node_vector(int num_nodes, CouplingNodes nodes) {
  if (nodes.i == nodes.j) throw InputError("coupling nodes must differ");
  for (int n : {nodes.i, nodes.j})
    if (n < 0 || n > num_nodes) throw InputError("node " + std::to_string(n) + " does not exist");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(num_nodes);
  if (nodes.i > 0) v(nodes.i - 1) += 1.0;
  if (nodes.j > 0) v(nodes.j - 1) -= 1.0;
  return v;
}

const InductiveBranch& inductor_on(const TransformedCircuit& tc, CouplingNodes nodes) {
  node_vector(tc.matrices.num_nodes, nodes);
  const NodePair pair = NodePair::make(nodes.i, nodes.j);
  for (const auto& br : tc.matrices.branches)
    if (br.kind == BranchKind::Inductor && br.nodes == pair) return br;
  throw InputError("no inductor on edge (" + std::to_string(nodes.i) + "," + std::to_string(nodes.j) + ")");
}

}  // namespace

Eigen::RowVectorXd capacitive_mode_weights(const TransformedCircuit& tc, CouplingNodes nodes) {
  const Eigen::VectorXd e = node_vector(tc.matrices.num_nodes, nodes);
  const Eigen::MatrixXd cinv = tc.matrices.C.inverse();
  return e.transpose() * cinv * tc.R;
}

Eigen::RowVectorXd flux_mode_weights(const TransformedCircuit& tc, CouplingNodes nodes) {
  const Eigen::VectorXd e = node_vector(tc.matrices.num_nodes, nodes);
  return e.transpose() * tc.S;
}

SparseMatrix capacitive_coupling_op(const HamiltonianBuilder& builder, CouplingNodes nodes,
                                    std::span<const double> charge_offsets) {
  const auto& tc = builder.circuit();
  const Eigen::RowVectorXd weights = capacitive_mode_weights(tc, nodes);
  const auto& part = tc.partition;
  const double scale = weights.cwiseAbs().maxCoeff();
  SparseMatrix op(builder.dim(), builder.dim());
  for (int m = 0; m < part.size(); ++m) {
    if (std::abs(weights(m)) <= 1e-14 * scale) continue;
    op += weights(m) * builder.mode_charge(m, charge_offsets);
  }
  op.makeCompressed();
  return op;
}

SparseMatrix inductive_coupling_op(const HamiltonianBuilder& builder, CouplingNodes nodes) {
  const auto& tc = builder.circuit();
  const InductiveBranch& br = inductor_on(tc, nodes);
  const Eigen::RowVectorXd weights = flux_mode_weights(tc, nodes);
  const auto& part = tc.partition;
  const double scale = weights.cwiseAbs().maxCoeff();
  SparseMatrix op(builder.dim(), builder.dim());
  for (int m = 0; m < part.size(); ++m) {
    if (std::abs(weights(m)) <= 1e-12 * scale) continue;
    if (part.kind(m) == ModeKind::Charge)
      throw InputError("the inductor on edge (" + std::to_string(nodes.i) + "," + std::to_string(nodes.j) +
                       ") couples to charge mode " + std::to_string(m + 1));
    op += (weights(m) / br.value) * builder.mode_flux(m);
  }
  op.makeCompressed();
  return op;
}

SparseMatrix coupling_op(const Circuit& circuit, CouplingKind kind, CouplingNodes nodes) {
  if (kind == CouplingKind::Capacitive)
    return capacitive_coupling_op(circuit.builder(), nodes, circuit.params().charge_offsets);
  return inductive_coupling_op(circuit.builder(), nodes);
}

Complex matrix_element(const SparseMatrix& op, const Spectrum& spectrum, int m, int n) {
  const auto count = spectrum.evecs.cols();
  if (m < 0 || n < 0 || m >= count || n >= count)
    throw InputError("states must be below the number of computed eigenpairs (" + std::to_string(count) + ")");
  if (op.rows() != spectrum.evecs.rows()) throw InputError("operator and eigenvectors have different dimensions");
  const Eigen::VectorXcd on = op * spectrum.evecs.col(n);
  return spectrum.evecs.col(m).dot(on);
}

}  // namespace cqe
