#pragma once

// Depolarization rates from lossy elements coupled to thermal baths, and
// pure dephasing rates from 1/f fluctuations of circuit parameters.

#include <string>
#include <string_view>
#include <vector>

#include "cqe/solver.hpp"

namespace cqe {

enum class DecayChannel { Capacitive, Inductive, Quasiparticle };
enum class DephasingChannel { CriticalCurrent, Charge, Flux };
enum class Direction { Downward, Upward, Total };

std::string_view to_string(DecayChannel c);
std::string_view to_string(DephasingChannel c);
std::string_view to_string(Direction d);

/// Contribution of one lossy element or one noisy parameter.
struct RateContribution {
  std::string source;
  double rate = 0.0;       // 1/s
  double downward = 0.0;   // decay only
  double upward = 0.0;     // decay only
  double first_derivative = 0.0;   // dephasing only: ∂ω_mn/∂λ
  double second_derivative = 0.0;  // dephasing only: ∂²ω_mn/∂λ²
  double amplitude = 0.0;          // dephasing only: A_λ in the units of λ
};

struct RateResult {
  double rate = 0.0;  // 1/s
  std::string channel;
  int m = 0;
  int n = 0;
  Direction direction = Direction::Total;
  double omega = 0.0;     // ω_m - ω_n, rad/s
  double downward = 0.0;  // emission rate from the upper to the lower state
  double upward = 0.0;    // absorption rate from the lower to the upper state
  std::vector<RateContribution> contributions;
  std::vector<std::string> warnings;
};

/// Bath spectral densities S(ω) at signed angular frequency ω. Positive ω is
/// emission into the bath. Each satisfies S(ω)/S(-ω) = exp(ħω/k_B T).
double voltage_sdf(double omega, double capacitance, double quality, double temperature);
double current_sdf(double omega, double inductance, double quality, double temperature);
double qp_admittance_real(double omega, double josephson_energy, double gap, double qp_density, double temperature);
double qp_sdf(double omega, double josephson_energy, double gap, double qp_density, double temperature);

/// Frequencies closer to zero than this cannot be evaluated (rad/s).
inline constexpr double min_transition_omega = 1e3;

/// Γ_{from→to} for one channel, summed over every element of that kind.
RateResult transition_rate(const Circuit& circuit, const Spectrum& spectrum, DecayChannel channel, int from, int to);

/// total = false: the downward rate between m and n. total = true: the sum of
/// the downward and upward rates (1/T1).
RateResult decay_rate(const Circuit& circuit, const Spectrum& spectrum, DecayChannel channel, int m, int n,
                      bool total = true);

/// 1/f dephasing rate between m and n. Derivatives of ω_mn are taken by
/// central differences around the circuit's current operating point.
RateResult dephasing_rate(const Circuit& circuit, DephasingChannel channel, int m, int n);

/// The two terms of the 1/f dephasing expression for one parameter:
/// first = 2 A² (∂ω)² |ln ω_low t_exp|,
/// second = 2 A⁴ (∂²ω)² (ln² (ω_hi/ω_low) + 2 ln² (ω_low t_exp)).
struct DephasingTerms {
  double first = 0.0;
  double second = 0.0;
};
DephasingTerms dephasing_terms(double amplitude, double d1, double d2, const NoiseEnvironment& env);

}  // namespace cqe
