#pragma once

// Classical circuit matrices: capacitance, inverse inductance, the inductive
// branch graph with its spanning tree, loop incidence and the assignment of
// external fluxes to branches.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqe/netlist.hpp"

namespace cqe {

enum class BranchKind { Inductor, Junction };

struct InductiveBranch {
  int index = 0;
  BranchKind kind = BranchKind::Inductor;
  NodePair nodes;
  int edge = 0;     // position in CircuitSpec::edges
  int element = 0;  // position within the edge
  double value = 0.0;  // inductance (H) or Josephson energy (J)
  Eigen::VectorXd w;   // node incidence, length n_N, entries in {-1, 0, 1}
  Eigen::VectorXd b;   // external-flux weights, length n_L
  std::vector<int> loops;  // declared loop indices the element lists

  // Loss and noise parameters carried from the element definition.
  QualityFactor quality;   // inductors
  double noise_amp = 0.0;  // junctions: relative critical-current noise
  double gap_joule = 0.0;  // junctions
  double qp_density = 0.0; // junctions

  /// Node where the branch starts (+1 entry of w); ground edges start at the
  /// non-ground node.
  int tail() const { return nodes.first == 0 ? nodes.second : nodes.first; }
  int head() const { return nodes.first == 0 ? 0 : nodes.second; }
};

/// A physical capacitor (edge capacitor or parallel capacitor of an
/// inductive element) with its loss model.
struct CapacitorInstance {
  NodePair nodes;
  double capacitance = 0.0;  // F
  QualityFactor quality;
};

struct SpanningTree {
  std::vector<int> tree;      // branch indices in the tree
  std::vector<int> closures;  // branch indices outside the tree
  Eigen::MatrixXd G;          // declared loops x branches, entries in {-1, 0, 1}
  Eigen::MatrixXd G_full;     // declared loops followed by hidden zero-flux loops
};

struct CircuitMatrices {
  int num_nodes = 0;
  int num_loops = 0;
  Eigen::MatrixXd C;      // F
  Eigen::MatrixXd Lstar;  // 1/H
  std::vector<InductiveBranch> branches;
  std::vector<CapacitorInstance> capacitors;
  Eigen::MatrixXd W;      // branches x n_N
  Eigen::MatrixXd B;      // branches x n_L
  Eigen::MatrixXd G;      // n_L x branches
  Eigen::VectorXd C_ed;   // per-branch capacitance (F)
  SpanningTree tree;
  FluxDistribution flux_dist = FluxDistribution::Junctions;

  /// bᵀ φ_ext for branch k given loop phases (radians).
  double branch_flux_phase(int k, std::span<const double> loop_phases) const;
};

enum class TreeChoice { Default, Reversed };

Eigen::MatrixXd build_cap_matrix(const CircuitSpec& spec);
Eigen::MatrixXd build_susceptance_matrix(const CircuitSpec& spec);
std::vector<CapacitorInstance> collect_capacitors(const CircuitSpec& spec);

/// Inductive branches in canonical order (edge order, then declaration
/// order within an edge), with w filled and b empty.
std::vector<InductiveBranch> collect_branches(const CircuitSpec& spec);

/// Deterministic spanning forest of the inductive graph. Branches are added
/// in priority order whenever they join two separate components, so every
/// declared loop has its highest-priority-index member outside the tree.
/// Loop orientation does not depend on the tree: each loop is traversed so
/// that its last member in canonical order runs forward.
SpanningTree build_spanning_tree(const CircuitSpec& spec, std::span<const InductiveBranch> branches,
                                 TreeChoice choice = TreeChoice::Default);

/// Closure-branch flux assignment for stationary fluxes: G B = I with tree
/// branches carrying no flux.
Eigen::MatrixXd assign_fluxes_static(const SpanningTree& tree, int num_branches, int num_loops);

/// Capacitance attributed to each inductive branch for the time-dependent
/// distribution: the explicit parallel capacitor, else the edge's plain
/// capacitors for the first inductive element of the edge, else 1e-20 F.
Eigen::VectorXd branch_capacitances(const CircuitSpec& spec, std::span<const InductiveBranch> branches);

/// Solves Wᵀ C_ed B = 0, G B = I (hidden loops carry zero flux).
Eigen::MatrixXd assign_fluxes_timedep(const Eigen::MatrixXd& W, const Eigen::MatrixXd& G_full,
                                      const Eigen::VectorXd& C_ed, int num_loops);

CircuitMatrices build_circuit_matrices(const CircuitSpec& spec, TreeChoice choice = TreeChoice::Default);

/// Empty when the declared loop is a single closed cycle of inductive
/// branches, otherwise a description of the problem.
std::optional<std::string> loop_closure_problem(const CircuitSpec& spec, const std::string& loop_id);

/// One message per inductive cycle that no declared loop accounts for.
/// Throws InputError when the declared loops are inconsistent.
std::vector<std::string> undeclared_cycle_warnings(const CircuitSpec& spec);

}  // namespace cqe
