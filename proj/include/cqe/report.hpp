#pragma once

// Human- and machine-readable summaries of a transformed circuit and
// writers for tabular results.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqe/solver.hpp"

namespace cqe {

struct ModeSummary {
  int number = 0;  // 1-based
  ModeKind kind = ModeKind::Harmonic;
  double frequency_hz = 0.0;  // harmonic
  double phase_zp = 0.0;      // harmonic: (2π/Φ0) sqrt(ħZ/2)
  double charge_offset = 0.0; // charge
  bool frozen = false;        // charge mode without junction coupling
};

struct JunctionSummary {
  int branch = 0;
  NodePair nodes;
  double energy_hz = 0.0;
  std::vector<double> phase_prefactors;  // per harmonic mode, w̃ times φ_zp
  std::vector<int> charge_powers;        // per charge mode
  std::vector<double> flux_factors;      // per loop, b_k
};

struct InductorSummary {
  int branch = 0;
  NodePair nodes;
  double inductance = 0.0;             // H
  std::vector<double> flux_weights;    // per harmonic mode, w̃
  std::vector<double> flux_factors;    // per loop, b_k
};

struct Description {
  std::vector<ModeSummary> modes;
  Eigen::MatrixXd charging_energy_hz;  // charge block: H = Σ E_ij (n_i + n_gi)(n_j + n_gj)
  std::vector<JunctionSummary> junctions;
  std::vector<InductorSummary> inductors;
  std::vector<std::string> loops;
  std::vector<std::string> warnings;
};

Description describe(const Circuit& circuit);
std::string describe_text(const Description& d);
nlohmann::json describe_json(const Description& d);

/// Shortest round-trip decimal representation.
std::string format_number(double x);

/// CSV: parameter value, then e_0 .. e_{n-1} in Hz. One row per column of
/// `efreqs`; NaN columns are skipped.
void write_spectrum_csv(std::ostream& out, const std::string& parameter, std::span<const double> values,
                        const Eigen::MatrixXd& efreqs);
nlohmann::json spectrum_json(const std::string& parameter, std::span<const double> values, const Eigen::MatrixXd& efreqs);

}  // namespace cqe
