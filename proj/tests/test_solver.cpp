#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include "cqe/constants.hpp"
#include "cqe/eigensolver.hpp"
#include "cqe/error.hpp"
#include "cqe/solver.hpp"
#include "support.hpp"

using namespace cqe;

namespace {

SparseMatrix sparse_of(const Eigen::MatrixXcd& m) { return m.sparseView(); }

// Frozen Mathieu characteristic values for E_C = 0.2 GHz, E_J = 10 GHz
// (tests/oracles/reference_values.py), GHz.
const double transmon_levels[] = {-8.051355909313358, -4.262972124449971, -0.7044329454316591,
                                  2.5972979905484923, 5.561048116185688,  8.360214258362117};

}  // namespace

TEST_CASE("Lanczos agrees with a dense solver on random Hermitian matrices") {
  support::Gen g(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXcd m = g.hermitian(8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    const EigenResult r = lanczos_lowest(sparse_of(m), 3);
    for (int k = 0; k < 3; ++k) CHECK(r.values(k) == Catch::Approx(es.eigenvalues()(k)).epsilon(1e-10));
  }
}

TEST_CASE("Lanczos agrees with a dense solver on a larger sparse matrix") {
  support::Gen g(22);
  const int n = 700;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = g.uniform(-5.0, 5.0);
    for (int d : {1, 7, 40}) {
      if (i + d >= n) continue;
      const Complex v{g.uniform(-1, 1), g.uniform(-1, 1)};
      m(i, i + d) = v;
      m(i + d, i) = std::conj(v);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const EigenResult r = lowest_eigenpairs(sparse_of(m), 6);
  REQUIRE_FALSE(r.dense);
  for (int k = 0; k < 6; ++k) {
    CHECK(r.values(k) == Catch::Approx(es.eigenvalues()(k)).epsilon(1e-10));
    const Complex overlap = es.eigenvectors().col(k).dot(r.vectors.col(k));
    CHECK(std::abs(overlap) == Catch::Approx(1.0).epsilon(1e-8));
  }
  CHECK(r.residuals.maxCoeff() <= 1e-12 * r.norm_estimate * 10.0);
}

TEST_CASE("phase convention makes the largest component real and positive") {
  support::Gen g(23);
  DenseMatrix v = DenseMatrix::Random(6, 3);
  fix_phases(v);
  for (int c = 0; c < 3; ++c) {
    Eigen::Index idx = 0;
    v.col(c).cwiseAbs().maxCoeff(&idx);
    CHECK(v(idx, c).imag() == 0.0);
    CHECK(v(idx, c).real() > 0.0);
  }
}

TEST_CASE("LC oscillator levels are equally spaced") {
  Circuit c = support::load("lc.net");
  c.set_truncations({12});
  const Spectrum s = c.diag(6);
  const double f = 1.0 / (2.0 * constants::pi * std::sqrt(100e-15 * 10e-9));
  for (int k = 1; k < 6; ++k) CHECK(support::rel_diff(s.efreqs(k) - s.efreqs(k - 1), f) <= 1e-9);
}

TEST_CASE("Cooper-pair box without tunnelling follows 4 E_C (n + n_g)^2") {
  CircuitSpec spec = parse_netlist("[settings]\ncharge_offset.1 = 0.2\n[elements]\n(0,1): C 1 GHz; JJ 1e-30 GHz\n");
  Circuit c(spec);
  c.set_truncations({21});
  const Spectrum s = c.diag(6);
  std::vector<double> expected;
  for (int n = -10; n <= 10; ++n) expected.push_back(4.0 * 1e9 * (n + 0.2) * (n + 0.2));
  std::sort(expected.begin(), expected.end());
  for (int k = 0; k < 6; ++k) CHECK(support::rel_diff(s.efreqs(k), expected[static_cast<std::size_t>(k)]) <= 1e-9);
}

TEST_CASE("transmon matches Mathieu characteristic values") {
  Circuit c = support::load("transmon.net");
  c.set_truncations({61});
  const Spectrum s = c.diag(6);
  for (int k = 0; k < 6; ++k) CHECK(support::rel_diff(s.efreqs(k) / 1e9, transmon_levels[k]) <= 1e-9);
}

TEST_CASE("eigenvalues do not increase as the truncation grows") {
  Circuit c = support::load("fluxonium.net");
  c.set_flux("loop1", 0.37);
  Eigen::VectorXd prev;
  for (int n : {12, 20, 30, 45, 60}) {
    c.set_truncations({n});
    const Eigen::VectorXd e = c.diag(5).efreqs;
    if (prev.size()) {
      for (int k = 0; k < 5; ++k) CHECK(e(k) <= prev(k) + 1e-6 * std::abs(prev(k)) + 1.0);
    }
    prev = e;
  }
  Circuit z = support::load("zero_pi.net");
  z.set_flux("loop1", 0.2);
  prev.resize(0);
  for (auto t : std::vector<std::vector<int>>{{6, 1, 7}, {10, 1, 11}, {14, 1, 15}}) {
    z.set_truncations(t);
    const Eigen::VectorXd e = z.diag(4).efreqs;
    if (prev.size())
      for (int k = 0; k < 4; ++k) CHECK(e(k) <= prev(k) + 1e-9 * std::abs(prev(k)) + 1.0);
    prev = e;
  }
}

TEST_CASE("spectra do not depend on the spanning tree or the flux distribution") {
  const std::vector<std::pair<std::string, std::vector<int>>> cases{{"zero_pi.net", {10, 1, 11}},
                                                                     {"fluxonium.net", {60}},
                                                                     {"two_loop.net", {8, 7, 7}},
                                                                     {"rf_squid.net", {14, 14}},
                                                                     {"stacked_loops.net", {10, 10, 7}}};
  for (const auto& [name, trunc] : cases) {
    INFO(name);
    std::vector<Eigen::VectorXd> spectra;
    for (auto dist : {FluxDistribution::Junctions, FluxDistribution::All})
      for (auto tree : {TreeChoice::Default, TreeChoice::Reversed}) {
        CircuitSpec spec = support::load_spec(name);
        spec.flux_dist = dist;
        Circuit c(spec, tree);
        c.set_truncations(trunc);
        spectra.push_back(c.diag(5).efreqs);
      }
    const double span = spectra[0](4) - spectra[0](0);
    for (std::size_t i = 1; i < spectra.size(); ++i)
      CHECK(support::max_rel_diff(spectra[0], spectra[i], span) <= 1e-6);
  }
}

TEST_CASE("0-pi spectrum is periodic and symmetric in the external flux") {
  Circuit c = support::load("zero_pi.net");
  c.set_truncations({10, 1, 11});
  const std::vector<double> flux{0.13, 1.13, 0.87, -0.13};
  const Eigen::MatrixXd e = sweep(c, SweepTarget::flux("loop1"), flux, 4);
  for (int j = 1; j < 4; ++j)
    for (int k = 0; k < 4; ++k) CHECK(support::rel_diff(e(k, 0), e(k, j)) <= 1e-9);
}

TEST_CASE("sweeps are deterministic and thread-count independent") {
  Circuit c = support::load("fluxonium.net");
  c.set_truncations({50});
  const auto flux = support::linspace(0.0, 1.0, 9);
  const Eigen::MatrixXd a = sweep(c, SweepTarget::flux("loop1"), flux, 4, 1);
  const Eigen::MatrixXd b = sweep(c, SweepTarget::flux("loop1"), flux, 4, 1);
  const Eigen::MatrixXd t = sweep(c, SweepTarget::flux("loop1"), flux, 4, 3);
  CHECK(a == b);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index k = 0; k < a.rows(); ++k) CHECK(support::rel_diff(a(k, j), t(k, j)) <= 1e-12);
}

TEST_CASE("charge-offset and element sweeps") {
  Circuit c = support::load("cpb.net");
  c.set_truncations({21});
  const std::vector<double> ng{0.0, 0.5, 1.0};
  const Eigen::MatrixXd e = sweep(c, SweepTarget::charge_offset(1), ng, 2);
  CHECK(support::rel_diff(e(0, 0), e(0, 2)) <= 1e-12);
  // Degeneracy lifted by tunnelling at n_g = 1/2: gap = E_J (2 GHz) to leading order.
  CHECK((e(1, 1) - e(0, 1)) / 1e9 == Catch::Approx(2.0).epsilon(0.05));

  const std::vector<double> ej{1.0, 2.0};
  const Eigen::MatrixXd f = sweep(c, SweepTarget::element_value({NodePair::make(0, 1), 1}), ej, 2);
  CHECK(f(1, 1) - f(0, 1) != Catch::Approx(f(1, 0) - f(0, 0)));
}

TEST_CASE("a failing sweep point reports its index and partial results") {
  Circuit c = support::load("cpb.net");
  c.set_truncations({11});
  const std::vector<double> ej{1.0, 2.0, -1.0, 3.0};
  try {
    sweep(c, SweepTarget::element_value({NodePair::make(0, 1), 1}), ej, 2);
    FAIL("expected a sweep error");
  } catch (const SweepError& e) {
    CHECK(e.index() == 2);
    CHECK_FALSE(e.partial().col(1).hasNaN());
    CHECK(e.partial().col(2).hasNaN());
    CHECK(e.partial().col(3).hasNaN());
  }
}

TEST_CASE("invalid requests are input errors") {
  Circuit c = support::load("zero_pi.net");
  CHECK_THROWS_AS(c.set_truncations({5, 5}), InputError);
  CHECK_THROWS_AS(c.set_flux("nope", 0.1), InputError);
  CHECK_THROWS_AS(c.set_charge_offset(1, 0.1), InputError);
  c.set_truncations({3, 1, 3});
  CHECK_THROWS_AS(c.diag(9), InputError);
  CHECK_THROWS_AS(c.diag(0), InputError);
}

TEST_CASE("truncation probe reports convergence") {
  Circuit c = support::load("fluxonium.net");
  const ConvergenceReport r = convergence_probe(c, 3, {{30}, {60}, {90}, {120}}, 1e-6);
  REQUIRE(r.efreqs.cols() == 4);
  CHECK(r.rel_change.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.rel_change.col(3).maxCoeff() < r.rel_change.col(1).maxCoeff());
  for (bool ok : r.converged) CHECK(ok);
}
