#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "cqe/constants.hpp"
#include "cqe/hamiltonian.hpp"
#include "cqe/operators.hpp"
#include "support.hpp"

using namespace cqe;

namespace {

// exp(α a† - α* a) by dense matrix exponential in a large Fock space.
Eigen::MatrixXcd displacement_by_expm(int levels, Complex alpha) {
  const Eigen::MatrixXcd a = Eigen::MatrixXcd(annihilation_op(levels));
  const Eigen::MatrixXcd gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return gen.exp();
}

}  // namespace

TEST_CASE("ladder operators") {
  const Eigen::MatrixXcd a = Eigen::MatrixXcd(annihilation_op(6));
  const Eigen::MatrixXcd n = Eigen::MatrixXcd(number_op(6));
  CHECK((a.adjoint() * a - n).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((Eigen::MatrixXcd(creation_op(6)) - a.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  // [a, a†] = 1 away from the truncation edge.
  const Eigen::MatrixXcd comm = a * a.adjoint() - a.adjoint() * a;
  for (int k = 0; k < 5; ++k) CHECK(std::abs(comm(k, k) - 1.0) <= 1e-14);
}

TEST_CASE("charge window and charge raising") {
  CHECK(charge_number(0, 5) == -2);
  CHECK(charge_number(4, 5) == 2);
  const Eigen::MatrixXcd up = Eigen::MatrixXcd(charge_raise_op(5));
  for (int k = 0; k < 4; ++k) CHECK(up(k + 1, k) == Complex(1.0));
  CHECK(up.col(4).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXcd q = Eigen::MatrixXcd(charge_op(3, 0.25));
  CHECK(q(0, 0).real() == Catch::Approx(2.0 * constants::e * (-1 + 0.25)).epsilon(1e-15));
}

TEST_CASE("displacement matrix elements match a dense matrix exponential") {
  support::Gen g(7);
  for (int trial = 0; trial < 8; ++trial) {
    const Complex alpha{g.uniform(-1.5, 1.5), g.uniform(-1.5, 1.5)};
    const int levels = 15;
    const Eigen::MatrixXcd ref = displacement_by_expm(120, alpha).topLeftCorner(levels, levels);
    const Eigen::MatrixXcd got = displacement_matrix(levels, alpha);
    CHECK((ref - got).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("vacuum expectation of the displacement operator") {
  support::Gen g(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Complex alpha{g.uniform(-4, 4), g.uniform(-4, 4)};
    const Complex v = displacement_matrix(g.integer(1, 40), alpha)(0, 0);
    CHECK(std::abs(v - std::exp(-std::norm(alpha) / 2.0)) <= 1e-10);
  }
}

TEST_CASE("displacement operator is unitary on a large untruncated block") {
  const Eigen::MatrixXcd d = displacement_matrix(200, Complex(0.8, -0.4));
  const Eigen::MatrixXcd block = (d.adjoint() * d).topLeftCorner(20, 20);
  CHECK((block - Eigen::MatrixXcd::Identity(20, 20)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Kronecker embedding puts mode 0 on the slowest index") {
  const SparseMatrix a = annihilation_op(3);
  const std::vector<int> dims{3, 2};
  const Eigen::MatrixXcd lifted = Eigen::MatrixXcd(lift(a, 0, dims));
  const Eigen::MatrixXcd expected = Eigen::MatrixXcd(kron(a, identity_op(2)));
  CHECK((lifted - expected).cwiseAbs().maxCoeff() == 0.0);
  // <m0 m1| a_0 |n0 n1> lives at index m0 * 2 + m1.
  CHECK(lifted(0 * 2 + 1, 1 * 2 + 1) == Complex(1.0));
}

TEST_CASE("Hamiltonians are Hermitian") {
  const std::vector<std::pair<std::string, std::vector<int>>> cases{
      {"zero_pi.net", {8, 1, 9}}, {"fluxonium.net", {40}},  {"lc.net", {10}},      {"cpb.net", {21}},
      {"two_loop.net", {8, 7, 7}}, {"dc_squid.net", {21}}, {"rf_squid.net", {10, 10}}, {"stacked_loops.net", {6, 6, 5}}};
  support::Gen g(3);
  for (const auto& [name, trunc] : cases) {
    INFO(name);
    Circuit c = support::load(name);
    c.set_truncations(trunc);
    for (int trial = 0; trial < 3; ++trial) {
      HamiltonianParams p = c.params();
      for (auto& phase : p.loop_phases) phase = g.uniform(-7.0, 7.0);
      for (auto& ng : p.charge_offsets) ng = g.uniform(-1.0, 1.0);
      const SparseMatrix h = c.hamiltonian(p);
      const double scale = one_norm(h);
      CHECK(hermiticity_error(h) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("random circuit Hamiltonians are Hermitian") {
  support::Gen g(4);
  for (int trial = 0; trial < 30; ++trial) {
    Circuit c(parse_netlist(support::random_netlist(g, g.integer(1, 3))));
    std::vector<int> trunc;
    for (int m = 0; m < c.transformed().modes(); ++m) trunc.push_back(g.integer(3, 6));
    c.set_truncations(trunc);
    const SparseMatrix h = c.hamiltonian();
    CHECK(hermiticity_error(h) <= 1e-12 * one_norm(h));
  }
}

TEST_CASE("half-angle junction exponential vanishes for odd charge powers") {
  Circuit c = support::load("transmon.net");
  c.set_truncations({7});
  const auto& b = c.builder();
  const SparseMatrix half = b.junction_exponential(0, true);
  CHECK(half.nonZeros() == 0);
  const SparseMatrix full = b.junction_exponential(0, false);
  CHECK(full.nonZeros() == 6);
}

TEST_CASE("LC Hamiltonian is diagonal with equal spacing") {
  Circuit c = support::load("lc.net");
  c.set_truncations({8});
  const Eigen::MatrixXcd h = Eigen::MatrixXcd(c.hamiltonian());
  const double f = 1.0 / (2.0 * constants::pi * std::sqrt(100e-15 * 10e-9));
  for (int k = 1; k < 8; ++k)
    CHECK((h(k, k) - h(k - 1, k - 1)).real() / constants::h == Catch::Approx(f).epsilon(1e-12));
  CHECK((h - Eigen::MatrixXcd(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}
