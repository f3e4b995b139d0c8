#include "cqe/noise.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <sstream>

#include "cqe/constants.hpp"
#include "cqe/coupling.hpp"
#include "cqe/error.hpp"
#include "cqe/special.hpp"

namespace cqe {

using namespace constants;

std::string_view to_string(DecayChannel c) {
  switch (c) {
    case DecayChannel::Capacitive: return "capacitive";
    case DecayChannel::Inductive: return "inductive";
    case DecayChannel::Quasiparticle: return "quasiparticle";
  }
  return "?";
}

std::string_view to_string(DephasingChannel c) {
  switch (c) {
    case DephasingChannel::CriticalCurrent: return "cc";
    case DephasingChannel::Charge: return "charge";
    case DephasingChannel::Flux: return "flux";
  }
  return "?";
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Downward: return "downward";
    case Direction::Upward: return "upward";
    case Direction::Total: return "total";
  }
  return "?";
}

namespace {

double thermal(double omega, double temperature) { return thermal_factor(hbar * omega / (2.0 * k_B * temperature)); }

void check_omega(double omega) {
  if (!(std::abs(omega) >= min_transition_omega))
    throw NumericalError("transition frequency too small for bath SDF evaluation (|omega| = " +
                         std::to_string(std::abs(omega)) + " rad/s)");
}

std::string edge_label(std::string_view kind, const NodePair& nodes) {
  return std::string(kind) + "(" + std::to_string(nodes.first) + "," + std::to_string(nodes.second) + ")";
}

void check_states(const Spectrum& spectrum, int a, int b) {
  const auto count = spectrum.evecs.cols();
  if (a < 0 || b < 0 || a >= count || b >= count)
    throw InputError("states must be below the number of computed eigenpairs (" + std::to_string(count) + ")");
  if (a == b) throw InputError("a transition needs two different states");
}

}  // namespace

double voltage_sdf(double omega, double capacitance, double quality, double temperature) {
  return hbar / (capacitance * quality) * thermal(omega, temperature);
}

double current_sdf(double omega, double inductance, double quality, double temperature) {
  return hbar / (inductance * quality) * thermal(omega, temperature);
}

double qp_admittance_real(double omega, double josephson_energy, double gap, double qp_density, double temperature) {
  const double w = std::abs(omega);
  const double x = hbar * w / (2.0 * k_B * temperature);
  return std::sqrt(2.0 / pi) * 8.0 * josephson_energy / (R_K * gap) * std::pow(2.0 * gap / (hbar * w), 1.5) *
         qp_density * std::sqrt(x) * k0_sinh(x);
}

double qp_sdf(double omega, double josephson_energy, double gap, double qp_density, double temperature) {
  return hbar * std::abs(omega) * qp_admittance_real(omega, josephson_energy, gap, qp_density, temperature) *
         thermal(omega, temperature);
}

RateResult transition_rate(const Circuit& circuit, const Spectrum& spectrum, DecayChannel channel, int from, int to) {
  check_states(spectrum, from, to);
  const auto& tc = circuit.transformed();
  const auto& builder = circuit.builder();
  const auto& part = tc.partition;
  const double temp = circuit.spec().environment.temperature;
  const double omega = (spectrum.energies(from) - spectrum.energies(to)) / hbar;
  check_omega(omega);

  RateResult r;
  r.channel = std::string(to_string(channel));
  r.m = from;
  r.n = to;
  r.omega = omega;
  r.direction = omega > 0.0 ? Direction::Downward : Direction::Upward;

  // Rates depend on |O|² only, so both directions use one state order and
  // see identical rounding.
  const int lo = std::min(from, to);
  const int hi = std::max(from, to);
  auto element = [&](int state_a, int state_b, const SparseMatrix& op) {
    const Eigen::VectorXcd v = op * spectrum.evecs.col(state_b);
    return spectrum.evecs.col(state_a).dot(v);
  };

  const HamiltonianParams params = circuit.params();
  if (channel == DecayChannel::Capacitive || channel == DecayChannel::Inductive) {
    // Matrix elements of each mode coordinate, shared by all elements.
    Eigen::VectorXcd mode_elements = Eigen::VectorXcd::Zero(part.size());
    for (int mode = 0; mode < part.size(); ++mode) {
      if (channel == DecayChannel::Capacitive)
        mode_elements(mode) = element(lo, hi, builder.mode_charge(mode, params.charge_offsets));
      else if (part.kind(mode) == ModeKind::Harmonic)
        mode_elements(mode) = element(lo, hi, builder.mode_flux(mode));
    }
    if (channel == DecayChannel::Capacitive) {
      for (const auto& cap : tc.matrices.capacitors) {
        const Eigen::RowVectorXd w = capacitive_mode_weights(tc, {cap.nodes.first, cap.nodes.second});
        Complex o = 0.0;
        for (int mode = 0; mode < part.size(); ++mode) o += w(mode) * mode_elements(mode);
        o *= cap.capacitance;
        const double q = cap.quality.evaluate(omega, ElementKind::Capacitor, temp);
        const double rate = std::norm(o) * voltage_sdf(omega, cap.capacitance, q, temp) / (hbar * hbar);
        r.contributions.push_back({edge_label("C", cap.nodes), rate});
        r.rate += rate;
      }
    } else {
      for (const auto& br : tc.matrices.branches) {
        if (br.kind != BranchKind::Inductor) continue;
        const Eigen::RowVectorXd w = flux_mode_weights(tc, {br.nodes.first, br.nodes.second});
        Complex o = 0.0;
        for (int mode = 0; mode < part.n_harmonic; ++mode) o += w(mode) * mode_elements(mode);
        const double q = br.quality.evaluate(omega, ElementKind::Inductor, temp);
        const double rate = std::norm(o) * current_sdf(omega, br.value, q, temp) / (hbar * hbar);
        r.contributions.push_back({edge_label("L", br.nodes), rate});
        r.rate += rate;
      }
    }
  } else {
    const Eigen::VectorXd origin = builder.harmonic_origin(params);
    for (const auto& br : tc.matrices.branches) {
      if (br.kind != BranchKind::Junction) continue;
      // The half-angle operator acts on the displacement from the basis origin.
      const double theta =
          tc.matrices.branch_flux_phase(br.index, params.loop_phases) - builder.junction_shift(br.index, origin);
      const SparseMatrix half = builder.junction_exponential(br.index, true);
      // sin(X/2 - θ/2) = (e^{-iθ/2} E - e^{iθ/2} E†) / 2i with E = exp(iX/2).
      const Complex e_ab = element(lo, hi, half);
      const Complex e_ba = std::conj(element(hi, lo, half));
      const Complex o = (std::exp(Complex(0.0, -0.5 * theta)) * e_ab - std::exp(Complex(0.0, 0.5 * theta)) * e_ba) /
                        Complex(0.0, 2.0);
      const double ej = params.junction_energies[static_cast<std::size_t>(br.index)];
      const double rate = std::norm(o) * qp_sdf(omega, ej, br.gap_joule, br.qp_density, temp) / (e * e);
      r.contributions.push_back({edge_label("JJ", br.nodes), rate});
      r.rate += rate;
    }
  }
  for (auto& c : r.contributions) (omega > 0.0 ? c.downward : c.upward) = c.rate;
  (omega > 0.0 ? r.downward : r.upward) = r.rate;
  return r;
}

RateResult decay_rate(const Circuit& circuit, const Spectrum& spectrum, DecayChannel channel, int m, int n, bool total) {
  check_states(spectrum, m, n);
  const bool m_upper = spectrum.energies(m) >= spectrum.energies(n);
  const int upper = m_upper ? m : n;
  const int lower = m_upper ? n : m;
  RateResult down = transition_rate(circuit, spectrum, channel, upper, lower);
  RateResult r = down;
  r.m = m;
  r.n = n;
  r.omega = (spectrum.energies(m) - spectrum.energies(n)) / hbar;
  r.direction = Direction::Downward;
  r.downward = down.rate;
  r.upward = 0.0;
  if (!total) return r;
  RateResult up = transition_rate(circuit, spectrum, channel, lower, upper);
  r.direction = Direction::Total;
  r.upward = up.rate;
  r.rate = r.downward + r.upward;
  for (std::size_t i = 0; i < r.contributions.size(); ++i) {
    r.contributions[i].upward = up.contributions[i].rate;
    r.contributions[i].rate = r.contributions[i].downward + r.contributions[i].upward;
  }
  return r;
}

DephasingTerms dephasing_terms(double amplitude, double d1, double d2, const NoiseEnvironment& env) {
  const double log_low = std::log(env.omega_low * env.t_exp);
  const double log_band = std::log(env.omega_high / env.omega_low);
  DephasingTerms t;
  t.first = 2.0 * amplitude * amplitude * d1 * d1 * std::abs(log_low);
  t.second = 2.0 * std::pow(amplitude, 4) * d2 * d2 * (log_band * log_band + 2.0 * log_low * log_low);
  return t;
}

RateResult dephasing_rate(const Circuit& circuit, DephasingChannel channel, int m, int n) {
  if (m < 0 || n < 0) throw InputError("state indices must be non-negative");
  if (m == n) throw InputError("dephasing needs two different states");
  const auto& tc = circuit.transformed();
  const auto& spec = circuit.spec();
  const auto& env = spec.environment;
  const auto& part = tc.partition;
  const int need = std::max(m, n) + 1;
  const HamiltonianParams base = circuit.params();

  RateResult r;
  r.channel = std::string(to_string(channel));
  r.m = m;
  r.n = n;
  r.direction = Direction::Total;

  struct Source {
    std::string label;
    double* (*slot)(HamiltonianParams&, int);
    int index;
    double scale;
    double amplitude;
  };
  std::vector<Source> sources;
  if (channel == DephasingChannel::CriticalCurrent) {
    for (const auto& br : tc.matrices.branches)
      if (br.kind == BranchKind::Junction)
        sources.push_back({edge_label("JJ", br.nodes),
                           [](HamiltonianParams& p, int k) { return &p.junction_energies[static_cast<std::size_t>(k)]; },
                           br.index, br.value, br.noise_amp * br.value});
  } else if (channel == DephasingChannel::Charge) {
    for (int c = 0; c < part.n_charge; ++c) {
      const int mode = part.n_harmonic + c + 1;
      sources.push_back({"n_g" + std::to_string(mode),
                         [](HamiltonianParams& p, int k) { return &p.charge_offsets[static_cast<std::size_t>(k)]; }, c,
                         1.0, env.charge_noise_for(mode)});
    }
  } else {
    if (spec.flux_dist != FluxDistribution::All && !spec.loops.empty())
      r.warnings.push_back(
          "flux noise evaluated with flux_dist = junctions; the result depends on the spanning tree for "
          "time-dependent flux");
    for (std::size_t l = 0; l < spec.loops.size(); ++l)
      sources.push_back({spec.loops[l].id,
                         [](HamiltonianParams& p, int k) { return &p.loop_phases[static_cast<std::size_t>(k)]; },
                         static_cast<int>(l), 2.0 * pi, spec.loops[l].noise_amp * 2.0 * pi});
  }

  const Spectrum center = circuit.diag(base, need);
  r.omega = (center.energies(m) - center.energies(n)) / hbar;
  const double noise = 64.0 * DBL_EPSILON * center.norm_estimate / hbar;

  double first_sum = 0.0;
  double second_sum = 0.0;
  for (const auto& src : sources) {
    HamiltonianParams p = base;
    double* slot = src.slot(p, src.index);
    const double lambda = *slot;
    auto omega_at = [&](double value) {
      *slot = value;
      const Spectrum s = circuit.diag(p, need);
      *slot = lambda;
      return (s.energies(m) - s.energies(n)) / hbar;
    };
    const double h1 = 1e-6 * src.scale;
    const double d_h = (omega_at(lambda + h1) - omega_at(lambda - h1)) / (2.0 * h1);
    const double d_half = (omega_at(lambda + 0.5 * h1) - omega_at(lambda - 0.5 * h1)) / h1;
    const double d1 = (4.0 * d_half - d_h) / 3.0;

    const double h2 = 1e-4 * src.scale;
    const double w0 = r.omega;
    const double d2 = (omega_at(lambda + h2) - 2.0 * w0 + omega_at(lambda - h2)) / (h2 * h2);
    const double d2_half = (omega_at(lambda + 0.5 * h2) - 2.0 * w0 + omega_at(lambda - 0.5 * h2)) / (0.25 * h2 * h2);

    const double floor1 = 10.0 * noise / h1;
    const double floor2 = 100.0 * noise / (h2 * h2);
    if (std::abs(d_h - d_half) > 1e-3 * std::abs(d1) + floor1 || std::abs(d2 - d2_half) > 1e-2 * std::abs(d2) + floor2) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "derivative of omega_" << m << n << " with respect to " << src.label
          << " did not converge: first derivative " << d_h << " (step " << h1 << ") vs " << d_half << " (step "
          << 0.5 * h1 << "), second derivative " << d2 << " (step " << h2 << ") vs " << d2_half << " (step "
          << 0.5 * h2 << ")";
      throw NumericalError(msg.str());
    }

    const DephasingTerms t = dephasing_terms(src.amplitude, d1, d2, env);
    RateContribution c;
    c.source = src.label;
    c.rate = std::sqrt(t.first + t.second);
    c.first_derivative = d1;
    c.second_derivative = d2;
    c.amplitude = src.amplitude;
    r.contributions.push_back(c);
    first_sum += t.first;
    second_sum += t.second;
  }
  r.rate = std::sqrt(first_sum + second_sum);
  return r;
}

}  // namespace cqe
