#include <catch2/catch_amalgamated.hpp>

#include "cqe/constants.hpp"
#include "cqe/error.hpp"
#include "cqe/noise.hpp"
#include "cqe/special.hpp"
#include "support.hpp"

using namespace cqe;
using namespace cqe::constants;

namespace {

struct Case {
  std::string name;
  std::vector<int> trunc;
  std::vector<DecayChannel> channels;
};

const std::vector<Case> decay_cases{
    {"zero_pi.net", {10, 1, 11}, {DecayChannel::Capacitive, DecayChannel::Inductive, DecayChannel::Quasiparticle}},
    {"fluxonium.net", {60}, {DecayChannel::Capacitive, DecayChannel::Inductive, DecayChannel::Quasiparticle}},
    {"lc.net", {8}, {DecayChannel::Capacitive, DecayChannel::Inductive}},
    {"cpb.net", {21}, {DecayChannel::Capacitive, DecayChannel::Quasiparticle}},
    {"transmon.net", {31}, {DecayChannel::Capacitive, DecayChannel::Quasiparticle}},
    {"two_loop.net", {8, 7, 7}, {DecayChannel::Capacitive, DecayChannel::Inductive, DecayChannel::Quasiparticle}},
    {"dc_squid.net", {21}, {DecayChannel::Capacitive, DecayChannel::Quasiparticle}},
    {"rf_squid.net", {12, 12}, {DecayChannel::Capacitive, DecayChannel::Inductive, DecayChannel::Quasiparticle}},
    {"stacked_loops.net", {10, 10, 7}, {DecayChannel::Capacitive, DecayChannel::Inductive, DecayChannel::Quasiparticle}}};

}  // namespace

TEST_CASE("thermal factor") {
  CHECK(thermal_factor(0.7) == Catch::Approx(2.0 / (1.0 - std::exp(-1.4))).epsilon(1e-14));
  CHECK(thermal_factor(-0.7) == Catch::Approx(2.0 / (std::exp(1.4) - 1.0)).epsilon(1e-14));
  CHECK(thermal_factor(800.0) == Catch::Approx(2.0));
  CHECK(thermal_factor(-800.0) == 0.0);
}

TEST_CASE("bath spectral densities obey detailed balance") {
  support::Gen g(41);
  for (int trial = 0; trial < 50; ++trial) {
    const double omega = 2.0 * pi * g.uniform(0.05e9, 12e9);
    const double t = g.uniform(0.01, 0.2);
    const double boltz = std::exp(hbar * omega / (k_B * t));
    CHECK(voltage_sdf(omega, 1e-13, 1e6, t) / voltage_sdf(-omega, 1e-13, 1e6, t) == Catch::Approx(boltz).epsilon(1e-12));
    CHECK(current_sdf(omega, 1e-8, 5e8, t) / current_sdf(-omega, 1e-8, 5e8, t) == Catch::Approx(boltz).epsilon(1e-12));
    const double ej = h * 10e9;
    const double gap = 3.4e-4 * e;
    CHECK(qp_sdf(omega, ej, gap, 3e-6, t) / qp_sdf(-omega, ej, gap, 3e-6, t) == Catch::Approx(boltz).epsilon(1e-12));
  }
}

TEST_CASE("decay rates satisfy detailed balance for every channel and fixture") {
  for (double temp : {0.015, 0.1}) {
    for (const auto& cs : decay_cases) {
      CircuitSpec spec = support::load_spec(cs.name);
      spec.environment.temperature = temp;
      Circuit c(spec);
      c.set_truncations(cs.trunc);
      const Spectrum s = c.diag(3);
      for (auto ch : cs.channels) {
        INFO(cs.name << " " << to_string(ch) << " T = " << temp);
        const RateResult r = decay_rate(c, s, ch, 0, 1, true);
        if (r.downward == 0.0) continue;
        const double boltz = std::exp(-hbar * std::abs(r.omega) / (k_B * temp));
        CHECK(support::rel_diff(r.upward / r.downward, boltz) <= 1e-8);
      }
    }
  }
}

TEST_CASE("capacitive T1 of an LC oscillator is Q / omega at low temperature") {
  CircuitSpec spec = parse_netlist("[settings]\ntemp = 0.001\n[elements]\n(0,1): C 100 fF Q 2e5; L 10 nH\n");
  Circuit c(spec);
  c.set_truncations({6});
  const Spectrum s = c.diag(3);
  const double omega = 1.0 / std::sqrt(100e-15 * 10e-9);
  const RateResult r = decay_rate(c, s, DecayChannel::Capacitive, 1, 0, false);
  CHECK(r.rate == Catch::Approx(omega / 2e5).epsilon(1e-9));
  const RateResult l = decay_rate(c, s, DecayChannel::Inductive, 1, 0, false);
  CHECK(l.rate > 0.0);
}

TEST_CASE("upward and downward transition rates are consistent") {
  Circuit c = support::load("fluxonium.net");
  c.set_truncations({60});
  const Spectrum s = c.diag(3);
  const RateResult down = transition_rate(c, s, DecayChannel::Capacitive, 1, 0);
  const RateResult up = transition_rate(c, s, DecayChannel::Capacitive, 0, 1);
  const RateResult total = decay_rate(c, s, DecayChannel::Capacitive, 0, 1, true);
  CHECK(down.direction == Direction::Downward);
  CHECK(up.direction == Direction::Upward);
  CHECK(total.rate == Catch::Approx(down.rate + up.rate).epsilon(1e-14));
}

TEST_CASE("degenerate transitions are refused") {
  CircuitSpec spec = parse_netlist("[settings]\ncharge_offset.1 = 0.5\n[elements]\n(0,1): C 1 GHz; JJ 1e-30 GHz\n");
  Circuit c(spec);
  c.set_truncations({11});
  const Spectrum s = c.diag(3);
  CHECK_THROWS_AS(decay_rate(c, s, DecayChannel::Capacitive, 0, 1), NumericalError);
}

TEST_CASE("dephasing terms") {
  NoiseEnvironment env;
  const DephasingTerms t = dephasing_terms(2.0, 3.0, 5.0, env);
  const double ll = std::log(env.omega_low * env.t_exp);
  const double lb = std::log(env.omega_high / env.omega_low);
  CHECK(t.first == Catch::Approx(2.0 * 4.0 * 9.0 * std::abs(ll)).epsilon(1e-14));
  CHECK(t.second == Catch::Approx(2.0 * 16.0 * 25.0 * (lb * lb + 2.0 * ll * ll)).epsilon(1e-14));
}

TEST_CASE("critical-current derivative agrees with an element sweep") {
  Circuit c = support::load("fluxonium.net");
  c.set_truncations({60});
  c.set_flux("loop1", 0.3);
  const RateResult r = dephasing_rate(c, DephasingChannel::CriticalCurrent, 0, 1);
  REQUIRE(r.contributions.size() == 1);
  // Independent route: rebuild the circuit at shifted E_J (GHz units).
  const double step = 1e-4;
  const std::vector<double> ej{10.2 - step, 10.2 + step};
  const Eigen::MatrixXd f = sweep(c, SweepTarget::element_value({NodePair::make(0, 1), 1}), ej, 2);
  const double d_omega = 2.0 * pi * ((f(1, 1) - f(0, 1)) - (f(1, 0) - f(0, 0))) / (2.0 * step * 1e9 * h);
  CHECK(support::rel_diff(r.contributions[0].first_derivative, -d_omega) <= 1e-5);
}

TEST_CASE("charge dephasing vanishes to first order at the sweet spot") {
  Circuit c = support::load("transmon.net");
  c.set_truncations({31});
  const RateResult r = dephasing_rate(c, DephasingChannel::Charge, 0, 1);
  REQUIRE(r.contributions.size() == 1);
  CHECK(std::abs(r.contributions[0].first_derivative) <= 1e-3 * std::abs(r.omega));
  Circuit off = support::load("transmon.net");
  off.set_truncations({31});
  off.set_charge_offset(1, 0.25);
  const RateResult r2 = dephasing_rate(off, DephasingChannel::Charge, 0, 1);
  CHECK(r2.rate > r.rate);
}

TEST_CASE("flux dephasing warns without the time-dependent flux distribution") {
  Circuit c = support::load("rf_squid.net");
  c.set_truncations({10, 10});
  const RateResult r = dephasing_rate(c, DephasingChannel::Flux, 0, 1);
  CHECK_FALSE(r.warnings.empty());
  Circuit f = support::load("fluxonium.net");
  f.set_truncations({60});
  f.set_flux("loop1", 0.3);
  CHECK(dephasing_rate(f, DephasingChannel::Flux, 0, 1).warnings.empty());
}

TEST_CASE("independent dephasing sources add in quadrature") {
  Circuit c = support::load("dc_squid.net");
  c.set_truncations({21});
  const RateResult r = dephasing_rate(c, DephasingChannel::CriticalCurrent, 0, 1);
  REQUIRE(r.contributions.size() == 2);
  const double a = r.contributions[0].rate;
  const double b = r.contributions[1].rate;
  CHECK(r.rate == Catch::Approx(std::sqrt(a * a + b * b)).epsilon(1e-12));
}
