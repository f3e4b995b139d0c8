#include <catch2/catch_amalgamated.hpp>

#include "cqe/error.hpp"
#include "cqe/topology.hpp"
#include "support.hpp"

using namespace cqe;

namespace {

const std::vector<std::string> looped{"zero_pi.net", "fluxonium.net", "two_loop.net", "dc_squid.net", "rf_squid.net",
                                      "stacked_loops.net"};

CircuitSpec with_dist(CircuitSpec s, FluxDistribution d) {
  s.flux_dist = d;
  return s;
}

}  // namespace

TEST_CASE("branch incidence rows") {
  const CircuitSpec s = support::load_spec("zero_pi.net");
  const auto branches = collect_branches(s);
  REQUIRE(branches.size() == 4);
  for (const auto& b : branches) {
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(s.num_nodes);
    if (b.nodes.first == 0) {
      expected(b.nodes.second - 1) = 1.0;
    } else {
      expected(b.nodes.first - 1) = 1.0;
      expected(b.nodes.second - 1) = -1.0;
    }
    CHECK(b.w == expected);
  }
}

TEST_CASE("capacitance and susceptance matrices of the 0-pi circuit are symmetric") {
  const CircuitSpec s = support::load_spec("zero_pi.net");
  const Eigen::MatrixXd c = build_cap_matrix(s);
  const Eigen::MatrixXd l = build_susceptance_matrix(s);
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // L* = Σ w wᵀ / l over linear inductors.
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(s.num_nodes, s.num_nodes);
  for (const auto& b : collect_branches(s))
    if (b.kind == BranchKind::Inductor) expected += b.w * b.w.transpose() / b.value;
  CHECK((l - expected).cwiseAbs().maxCoeff() <= 1e-12 * expected.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("static flux assignment satisfies G B = I on both trees") {
  for (const auto& name : looped) {
    INFO(name);
    const CircuitSpec s = with_dist(support::load_spec(name), FluxDistribution::Junctions);
    for (auto tree : {TreeChoice::Default, TreeChoice::Reversed}) {
      const CircuitMatrices m = build_circuit_matrices(s, tree);
      const Eigen::MatrixXd gb = m.G * m.B;
      CHECK((gb - Eigen::MatrixXd::Identity(m.num_loops, m.num_loops)).cwiseAbs().maxCoeff() <= 1e-12);
      // Tree branches carry no flux.
      for (int k : m.tree.tree) CHECK(m.B.row(k).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("loop orientation does not depend on the spanning tree") {
  for (const auto& name : looped) {
    INFO(name);
    const CircuitSpec s = support::load_spec(name);
    const CircuitMatrices a = build_circuit_matrices(s, TreeChoice::Default);
    const CircuitMatrices b = build_circuit_matrices(s, TreeChoice::Reversed);
    CHECK(a.G == b.G);
  }
}

TEST_CASE("time-dependent flux assignment removes the charge-flux cross terms") {
  for (const auto& name : looped) {
    INFO(name);
    const CircuitSpec s = with_dist(support::load_spec(name), FluxDistribution::All);
    const CircuitMatrices m = build_circuit_matrices(s);
    const Eigen::MatrixXd wc = m.W.transpose() * m.C_ed.asDiagonal();
    const double scale = wc.cwiseAbs().maxCoeff();
    CHECK((wc * m.B).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    CHECK((m.G * m.B - Eigen::MatrixXd::Identity(m.num_loops, m.num_loops)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("branch capacitance attribution") {
  const CircuitSpec s = support::load_spec("fluxonium.net");
  const auto branches = collect_branches(s);
  const Eigen::VectorXd c = branch_capacitances(s, branches);
  REQUIRE(c.size() == 2);
  // The inductor has no capacitor of its own; the junction carries Cq.
  CHECK(c(0) == 1e-20);
  CHECK(c(1) > 1e-15);
}

TEST_CASE("inconsistent loop declarations are rejected") {
  // The loop lists only one of two parallel junctions plus an element that
  // is not on the cycle.
  const auto s = parse_netlist(
      "[loops]\nl = flux 0\n[elements]\n(0,1): C 1 GHz; JJ 2 GHz loops l; JJ 3 GHz\n(1,2): C 1 GHz; L 1 GHz loops l\n");
  CHECK(loop_closure_problem(s, "l").has_value());
}

TEST_CASE("branch flux phase is the weighted sum of loop phases") {
  const CircuitSpec s = support::load_spec("stacked_loops.net");
  const CircuitMatrices m = build_circuit_matrices(s);
  const std::vector<double> phases{0.7, -1.3};
  for (int k = 0; k < static_cast<int>(m.branches.size()); ++k) {
    double expected = 0.0;
    for (int l = 0; l < m.num_loops; ++l) expected += m.B(k, l) * phases[static_cast<std::size_t>(l)];
    CHECK(m.branch_flux_phase(k, phases) == Catch::Approx(expected).margin(1e-15));
  }
}
