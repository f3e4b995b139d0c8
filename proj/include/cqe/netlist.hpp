#pragma once

// Circuit description: element types, units, the textual netlist format and
// its validation.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cqe/constants.hpp"

namespace cqe {

enum class UnitFamily { Frequency, Capacitance, Inductance };

struct Unit {
  UnitFamily family = UnitFamily::Frequency;
  double scale = 1e9;      // multiplier to the base unit (Hz, F or H)
  std::string symbol = "GHz";

  friend bool operator==(const Unit&, const Unit&) = default;
};

/// Looks up a unit symbol such as "GHz", "fF" or "nH".
std::optional<Unit> find_unit(std::string_view symbol);
Unit unit_or_throw(std::string_view symbol);

enum class ElementKind { Capacitor, Inductor, Junction };

std::string_view to_string(ElementKind kind);

struct ElementValue {
  double magnitude = 0.0;
  Unit unit;

  friend bool operator==(const ElementValue&, const ElementValue&) = default;
};

/// Converts an element value to SI: farad for capacitors, henry for
/// inductors, joule (Josephson energy) for junctions. Frequency values are
/// interpreted as energies E = h f: the charging energy e^2/2c for
/// capacitors and the inductive energy (Phi0/2pi)^2/l for inductors.
double to_si(const ElementValue& value, ElementKind kind);

/// Inverse of to_si: expresses an SI quantity in the given unit.
double from_si(double si_value, const Unit& unit, ElementKind kind);

/// Quality factor of a lossy element as a function of angular frequency.
class QualityFactor {
 public:
  enum class Kind { Default, Constant, PowerLaw, Custom };

  QualityFactor() = default;

  static QualityFactor constant(double q);
  /// q0 * (2 pi f_ref / |omega|)^exponent
  static QualityFactor power_law(double q0, double f_ref_hz, double exponent);
  static QualityFactor custom(std::function<double(double)> fn);

  Kind kind() const noexcept { return kind_; }
  double q0() const noexcept { return q0_; }
  double f_ref() const noexcept { return f_ref_; }
  double exponent() const noexcept { return exponent_; }

  /// Evaluates Q at |omega|. The default model depends on the element kind:
  /// capacitors use 1e6 (2pi 6 GHz / |omega|)^0.7, inductors the
  /// K0 sinh form referenced to 0.5 GHz at the given temperature.
  double evaluate(double omega, ElementKind kind, double temperature) const;

  friend bool operator==(const QualityFactor& a, const QualityFactor& b);

 private:
  Kind kind_ = Kind::Default;
  double q0_ = 0.0;
  double f_ref_ = 0.0;
  double exponent_ = 0.0;
  std::shared_ptr<const std::function<double(double)>> fn_;
};

struct CapacitorDef {
  ElementValue value;
  QualityFactor quality;
  std::string name;  // set for capacitors declared in [capacitors]

  friend bool operator==(const CapacitorDef&, const CapacitorDef&) = default;
};

struct InductorDef {
  ElementValue value;
  std::vector<std::string> loops;
  QualityFactor quality;
  std::optional<CapacitorDef> parallel_cap;

  friend bool operator==(const InductorDef&, const InductorDef&) = default;
};

struct JunctionDef {
  ElementValue value;
  std::vector<std::string> loops;
  std::optional<CapacitorDef> parallel_cap;
  double noise_amp = 1e-7;   // critical-current 1/f amplitude, relative to E_J
  double gap_ev = 3.4e-4;    // superconducting gap in eV
  double qp_density = 3e-6;

  friend bool operator==(const JunctionDef&, const JunctionDef&) = default;
};

using Element = std::variant<CapacitorDef, InductorDef, JunctionDef>;

ElementKind kind_of(const Element& element);

/// Unordered node pair, stored with first < second. Node 0 is ground.
struct NodePair {
  int first = 0;
  int second = 0;

  static NodePair make(int i, int j);

  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct Edge {
  NodePair nodes;
  std::vector<Element> elements;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct LoopDef {
  std::string id;
  double external_flux = 0.0;  // in units of Phi0
  double noise_amp = 1e-6;     // flux 1/f amplitude, relative to Phi0

  friend bool operator==(const LoopDef&, const LoopDef&) = default;
};

enum class FluxDistribution { Junctions, All };

/// Bath and 1/f-noise parameters shared by the decoherence estimates.
struct NoiseEnvironment {
  double temperature = 0.015;             // K
  double omega_low = 2.0 * constants::pi * 1.0;     // rad/s
  double omega_high = 2.0 * constants::pi * 3.0e9;  // rad/s
  double t_exp = 10e-6;                   // s
  double default_charge_noise = 1e-4;
  std::map<int, double> charge_noise;     // 1-based mode index -> amplitude

  double charge_noise_for(int mode) const;

  friend bool operator==(const NoiseEnvironment&, const NoiseEnvironment&) = default;
};

struct DefaultUnits {
  Unit capacitor;
  Unit inductor;
  Unit junction;

  friend bool operator==(const DefaultUnits&, const DefaultUnits&) = default;
};

struct CircuitSpec {
  int num_nodes = 0;                 // free (non-ground) nodes
  std::vector<Edge> edges;           // sorted by node pair, unique pairs
  std::vector<LoopDef> loops;
  FluxDistribution flux_dist = FluxDistribution::Junctions;
  std::map<int, double> charge_offsets;  // 1-based mode index -> n_g (units of 2e)
  NoiseEnvironment environment;
  DefaultUnits units;

  const LoopDef* find_loop(std::string_view id) const;
  int loop_index(std::string_view id) const;  // -1 when absent

  friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

/// Parses the textual netlist format (see docs/netlist.md). Throws
/// ParseError on syntax problems, unknown units, non-positive values,
/// duplicate loop ids and references to undeclared loops or capacitors.
CircuitSpec parse_netlist(std::string_view text);

CircuitSpec load_netlist(const std::string& path);

/// Canonical serialization; parse_netlist(format_netlist(s)) == s.
std::string format_netlist(const CircuitSpec& spec);

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity;
  std::string message;
};

/// Structural checks that do not stop parsing: disconnected nodes, open
/// loops, junctions with henry units, missing capacitive paths to ground.
std::vector<Diagnostic> validate(const CircuitSpec& spec);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Throws InputError listing every error-severity diagnostic.
void require_valid(const CircuitSpec& spec);

}  // namespace cqe
