#include <catch2/catch_amalgamated.hpp>

#include "cqe/constants.hpp"
#include "cqe/wavefunction.hpp"
#include "support.hpp"

using namespace cqe;

namespace {

// Riemann sum of |ψ|² on a uniform product grid covering every mode.
double grid_norm(const Circuit& c, const Spectrum& s, int state, double widths, int points) {
  const auto& tc = c.transformed();
  PhaseGrid grid;
  double cell = 1.0;
  const Eigen::VectorXd zp = tc.phase_zero_point();
  for (int m = 0; m < tc.modes(); ++m) {
    std::vector<double> axis;
    if (tc.partition.kind(m) == ModeKind::Harmonic) {
      const double half = widths * std::sqrt(2.0) * zp(m);
      axis = support::linspace(-half, half, points);
    } else {
      // One period sampled without its endpoint.
      axis = support::linspace(-constants::pi, constants::pi, points + 1);
      axis.pop_back();
    }
    cell *= axis[1] - axis[0];
    grid.axes.emplace_back(axis);
  }
  const GridValues g =
      eig_phase_coord(s.evecs.col(state), tc, c.builder().basis(), grid, c.builder().harmonic_origin(c.params()));
  double sum = 0.0;
  for (const auto& z : g.values) sum += std::norm(z);
  return sum * cell;
}

}  // namespace

TEST_CASE("Hermite polynomial of high order stays finite") {
  // mpmath, 50 digits (tests/oracles/reference_values.py).
  const double h150 = hermite_eval(150, 5.0);
  CHECK(std::isfinite(h150));
  CHECK(support::rel_diff(h150, 4.7981835341690545989e+158) <= 1e-11);
  CHECK(hermite_eval(0, 3.0) == 1.0);
  CHECK(hermite_eval(3, 0.5) == Catch::Approx(8 * 0.125 - 12 * 0.5).epsilon(1e-14));
}

TEST_CASE("normalized Hermite functions match high-precision values") {
  const struct {
    int n;
    double x;
    double value;
  } ref[] = {{0, 0.3, 0.71807412904900112887},
             {5, 1.2, -0.31183925267774478242},
             {40, 3.0, 0.057369581235740706387},
             {150, 5.0, 0.14873459109472155171},
             {300, 10.0, 0.14042159396551645857}};
  for (const auto& r : ref) {
    INFO("n = " << r.n);
    CHECK(support::rel_diff(hermite_function(r.n, r.x), r.value) <= 1e-11);
  }
}

TEST_CASE("Hermite functions are orthonormal") {
  const int count = 11;
  const auto x = support::linspace(-14.0, 14.0, 4001);
  const double dx = x[1] - x[0];
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(count, count);
  for (double xi : x) {
    const auto f = hermite_functions(count, xi);
    for (int m = 0; m < count; ++m)
      for (int n = 0; n < count; ++n) gram(m, n) += f[static_cast<std::size_t>(m)] * f[static_cast<std::size_t>(n)] * dx;
  }
  CHECK((gram - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("harmonic ground state is a Gaussian") {
  Circuit c = support::load("lc.net");
  c.set_truncations({6});
  const Spectrum s = c.diag(2);
  const double width = std::sqrt(2.0) * c.transformed().phase_zero_point()(0);
  PhaseGrid grid{{support::linspace(-3.0 * width, 3.0 * width, 31)}};
  const GridValues g = eig_phase_coord(s.evecs.col(0), c.transformed(), c.builder().basis(), grid);
  const auto& axis = std::get<std::vector<double>>(grid.axes[0]);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    const double y = axis[i] / width;
    const double expected = std::exp(-y * y / 2.0) / std::sqrt(width * std::sqrt(constants::pi));
    CHECK(std::abs(g.values[i]) == Catch::Approx(expected).epsilon(1e-12).margin(1e-300));
  }
}

TEST_CASE("exported grids are normalized") {
  const std::vector<std::pair<std::string, std::vector<int>>> cases{
      {"lc.net", {10}}, {"fluxonium.net", {60}}, {"transmon.net", {31}}, {"rf_squid.net", {12, 12}},
      {"zero_pi.net", {10, 1, 11}}};
  for (const auto& [name, trunc] : cases) {
    INFO(name);
    Circuit c = support::load(name);
    c.set_truncations(trunc);
    const Spectrum s = c.diag(3);
    for (int k = 0; k < 3; ++k) CHECK(grid_norm(c, s, k, 9.0, 121) == Catch::Approx(1.0).margin(1e-3));
  }
}

TEST_CASE("charge-mode wavefunctions are 2π periodic") {
  Circuit c = support::load("cpb.net");
  c.set_truncations({21});
  const Spectrum s = c.diag(3);
  const auto phi = support::linspace(-3.0, 3.0, 13);
  std::vector<double> shifted;
  for (double p : phi) shifted.push_back(p + 2.0 * constants::pi);
  const GridValues a = eig_phase_coord(s.evecs.col(1), c.transformed(), c.builder().basis(), PhaseGrid{{phi}});
  const GridValues b = eig_phase_coord(s.evecs.col(1), c.transformed(), c.builder().basis(), PhaseGrid{{shifted}});
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-12);
}

TEST_CASE("phase representation is linear in the state") {
  Circuit c = support::load("zero_pi.net");
  c.set_truncations({8, 1, 9});
  const Spectrum s = c.diag(2);
  PhaseGrid grid{{support::linspace(-3.0, 3.0, 9), 0.0, support::linspace(-1.5, 4.5, 7)}};
  const Complex alpha{0.3, -1.2};
  const Complex beta{-0.7, 0.4};
  const Eigen::VectorXcd mix = alpha * s.evecs.col(0) + beta * s.evecs.col(1);
  const auto& tc = c.transformed();
  const auto& basis = c.builder().basis();
  const GridValues a = eig_phase_coord(s.evecs.col(0), tc, basis, grid);
  const GridValues b = eig_phase_coord(s.evecs.col(1), tc, basis, grid);
  const GridValues m = eig_phase_coord(mix, tc, basis, grid);
  REQUIRE(m.shape == std::vector<int>{9, 7});
  for (std::size_t i = 0; i < m.values.size(); ++i)
    CHECK(std::abs(m.values[i] - (alpha * a.values[i] + beta * b.values[i])) <= 1e-12);
}

TEST_CASE("factorized evaluation matches direct summation") {
  Circuit c = support::load("rf_squid.net");
  c.set_truncations({5, 6});
  const Spectrum s = c.diag(2);
  const auto& tc = c.transformed();
  const auto& basis = c.builder().basis();
  const std::vector<double> p1{-0.4, 0.9};
  const std::vector<double> p2{0.2, -1.1, 0.5};
  const GridValues g = eig_phase_coord(s.evecs.col(1), tc, basis, PhaseGrid{{p1, p2}});
  for (std::size_t i = 0; i < p1.size(); ++i)
    for (std::size_t j = 0; j < p2.size(); ++j) {
      Complex direct = 0.0;
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 6; ++b)
          direct += s.evecs(a * 6 + b, 1) * mode_basis_function(tc, basis, 0, a, p1[i]) *
                    mode_basis_function(tc, basis, 1, b, p2[j]);
      CHECK(std::abs(g.values[i * p2.size() + j] - direct) <= 1e-12);
    }
}

TEST_CASE("grid shape ignores fixed axes") {
  PhaseGrid grid{{std::vector<double>{1, 2, 3}, 0.5, std::vector<double>{1, 2}}};
  CHECK(grid.shape() == std::vector<int>{3, 2});
  CHECK(grid.size() == 6);
}
