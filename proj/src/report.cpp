#include "cqe/report.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "cqe/constants.hpp"

namespace cqe {

using namespace constants;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

std::string fixed(double x, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

std::vector<double> row_of(const Eigen::MatrixXd& m, int row) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) v[static_cast<std::size_t>(j)] = m(row, j);
  return v;
}

double clean(double x, double scale) { return std::abs(x) <= 1e-12 * scale ? 0.0 : x; }

// Appends `coef·body` to a sum with the sign pulled into the joiner.
void append_term(std::string& sum, double coef, const std::string& body) {
  const bool negative = coef < 0.0;
  const double mag = std::abs(coef);
  const std::string factor = mag == 1.0 ? std::string() : fixed(mag);
  if (sum.empty())
    sum = (negative ? "-" : "") + factor + body;
  else
    sum += (negative ? " - " : " + ") + factor + body;
}

}  // namespace

Description describe(const Circuit& circuit) {
  const auto& tc = circuit.transformed();
  const auto& part = tc.partition;
  const auto& mats = tc.matrices;
  const HamiltonianParams params = circuit.params();
  const Eigen::VectorXd zp = tc.phase_zero_point();
  Description d;
  for (int m = 0; m < part.size(); ++m) {
    ModeSummary s;
    s.number = m + 1;
    s.kind = part.kind(m);
    if (s.kind == ModeKind::Harmonic) {
      s.frequency_hz = part.omega(m) / (2.0 * pi);
      s.phase_zp = zp(m);
    } else {
      const int c = m - part.n_harmonic;
      s.charge_offset = params.charge_offsets[static_cast<std::size_t>(c)];
      s.frozen = part.frozen[static_cast<std::size_t>(c)];
    }
    d.modes.push_back(s);
  }
  d.charging_energy_hz = tc.charge_inverse_capacitance() * (2.0 * e * e / h);
  const double ec_scale = d.charging_energy_hz.size() ? d.charging_energy_hz.cwiseAbs().maxCoeff() : 0.0;
  d.charging_energy_hz = d.charging_energy_hz.unaryExpr([&](double x) { return clean(x, ec_scale); }).eval();
  for (const auto& loop : circuit.spec().loops) d.loops.push_back(loop.id);
  for (const auto& br : mats.branches) {
    if (br.kind == BranchKind::Junction) {
      JunctionSummary j;
      j.branch = br.index;
      j.nodes = br.nodes;
      j.energy_hz = params.junction_energies[static_cast<std::size_t>(br.index)] / h;
      for (int m = 0; m < part.n_harmonic; ++m) j.phase_prefactors.push_back(clean(tc.wtilde(br.index, m) * zp(m), 1.0));
      for (int c = 0; c < part.n_charge; ++c)
        j.charge_powers.push_back(static_cast<int>(std::lround(tc.wtilde(br.index, part.n_harmonic + c))));
      for (int l = 0; l < mats.num_loops; ++l) j.flux_factors.push_back(clean(mats.B(br.index, l), 1.0));
      d.junctions.push_back(std::move(j));
    } else {
      InductorSummary s;
      s.branch = br.index;
      s.nodes = br.nodes;
      s.inductance = br.value;
      for (int m = 0; m < part.n_harmonic; ++m) s.flux_weights.push_back(clean(tc.wtilde(br.index, m), 1.0));
      s.flux_factors = row_of(mats.B, br.index);
      for (auto& f : s.flux_factors) f = clean(f, 1.0);
      d.inductors.push_back(std::move(s));
    }
  }
  d.warnings = circuit.warnings();
  return d;
}

std::string describe_text(const Description& d) {
  std::ostringstream out;
  auto phase_sum = [&](const JunctionSummary& j) {
    std::string s;
    for (std::size_t m = 0; m < j.phase_prefactors.size(); ++m) {
      if (j.phase_prefactors[m] == 0.0) continue;
      const std::string k = std::to_string(m + 1);
      append_term(s, j.phase_prefactors[m], "(a" + k + " + a" + k + "†)");
    }
    const std::size_t nh = j.phase_prefactors.size();
    for (std::size_t c = 0; c < j.charge_powers.size(); ++c)
      if (j.charge_powers[c] != 0) append_term(s, j.charge_powers[c], "θ" + std::to_string(nh + c + 1));
    for (std::size_t l = 0; l < j.flux_factors.size(); ++l)
      if (j.flux_factors[l] != 0.0) append_term(s, j.flux_factors[l], "φext(" + d.loops[l] + ")");
    return s.empty() ? std::string("0") : s;
  };

  out << "H =";
  bool first = true;
  auto term = [&](const std::string& t, bool negative = false) {
    out << (first ? (negative ? " -" : "") : (negative ? "\n    -" : "\n    +")) << " " << t;
    first = false;
  };
  for (const auto& m : d.modes)
    if (m.kind == ModeKind::Harmonic) term("hf" + std::to_string(m.number) + " a" + std::to_string(m.number) + "† a" + std::to_string(m.number));
  std::size_t nh = 0;
  for (const auto& m : d.modes) nh += m.kind == ModeKind::Harmonic;
  for (Eigen::Index i = 0; i < d.charging_energy_hz.rows(); ++i)
    for (Eigen::Index j = i; j < d.charging_energy_hz.cols(); ++j) {
      if (d.charging_energy_hz(i, j) == 0.0) continue;
      const std::string a = std::to_string(nh + static_cast<std::size_t>(i) + 1);
      const std::string b = std::to_string(nh + static_cast<std::size_t>(j) + 1);
      term(std::string(i == j ? "" : "2 ") + "EC" + a + b + " (n" + a + " + ng" + a + ")(n" + b + " + ng" + b + ")");
    }
  for (std::size_t k = 0; k < d.junctions.size(); ++k)
    term("EJ" + std::to_string(k + 1) + " cos(" + phase_sum(d.junctions[k]) + ")", true);
  for (const auto& ind : d.inductors) {
    bool any = false;
    for (double f : ind.flux_factors) any = any || f != 0.0;
    if (any) term("(linear flux bias of the inductor on (" + std::to_string(ind.nodes.first) + "," + std::to_string(ind.nodes.second) + "))");
  }
  if (first) out << " 0";
  out << "\n" << std::string(60, '-') << "\n";

  for (const auto& m : d.modes) {
    out << "mode " << m.number << ": ";
    if (m.kind == ModeKind::Harmonic)
      out << "harmonic  phi" << m.number << " = " << fixed(m.phase_zp) << " (a" << m.number << " + a" << m.number
          << "†)  f" << m.number << " = " << fixed(m.frequency_hz / 1e9) << " GHz\n";
    else
      out << "charge    ng" << m.number << " = " << format_number(m.charge_offset) << (m.frozen ? "  (not coupled to any junction)" : "") << "\n";
  }
  for (Eigen::Index i = 0; i < d.charging_energy_hz.rows(); ++i)
    for (Eigen::Index j = i; j < d.charging_energy_hz.cols(); ++j) {
      if (d.charging_energy_hz(i, j) == 0.0) continue;
      out << "EC" << nh + static_cast<std::size_t>(i) + 1 << nh + static_cast<std::size_t>(j) + 1 << " = "
          << fixed(d.charging_energy_hz(i, j) / 1e9) << " GHz\n";
    }
  for (std::size_t k = 0; k < d.junctions.size(); ++k) {
    const auto& j = d.junctions[k];
    out << "EJ" << k + 1 << " = " << fixed(j.energy_hz / 1e9) << " GHz on (" << j.nodes.first << "," << j.nodes.second
        << ")  prefactors:";
    for (std::size_t m = 0; m < j.phase_prefactors.size(); ++m) out << " " << fixed(j.phase_prefactors[m]);
    for (int p : j.charge_powers) out << " " << p;
    out << "  flux factors:";
    for (double f : j.flux_factors) out << " " << fixed(f);
    out << "\n";
  }
  for (const auto& ind : d.inductors) {
    out << "L on (" << ind.nodes.first << "," << ind.nodes.second << ") = " << fixed(ind.inductance * 1e9) << " nH  mode weights:";
    for (double w : ind.flux_weights) out << " " << fixed(w);
    out << "  flux factors:";
    for (double f : ind.flux_factors) out << " " << fixed(f);
    out << "\n";
  }
  for (const auto& w : d.warnings) out << "warning: " << w << "\n";
  return out.str();
}

nlohmann::json describe_json(const Description& d) {
  using nlohmann::json;
  json j;
  j["modes"] = json::array();
  for (const auto& m : d.modes) {
    json e{{"mode", m.number}, {"kind", m.kind == ModeKind::Harmonic ? "harmonic" : "charge"}};
    if (m.kind == ModeKind::Harmonic) {
      e["frequency_hz"] = m.frequency_hz;
      e["phase_zp"] = m.phase_zp;
    } else {
      e["charge_offset"] = m.charge_offset;
      e["frozen"] = m.frozen;
    }
    j["modes"].push_back(e);
  }
  json ec = json::array();
  for (Eigen::Index r = 0; r < d.charging_energy_hz.rows(); ++r) ec.push_back(row_of(d.charging_energy_hz, static_cast<int>(r)));
  j["charging_energy_hz"] = ec;
  j["loops"] = d.loops;
  j["junctions"] = json::array();
  for (const auto& x : d.junctions)
    j["junctions"].push_back({{"branch", x.branch},
                              {"nodes", {x.nodes.first, x.nodes.second}},
                              {"energy_hz", x.energy_hz},
                              {"phase_prefactors", x.phase_prefactors},
                              {"charge_powers", x.charge_powers},
                              {"flux_factors", x.flux_factors}});
  j["inductors"] = json::array();
  for (const auto& x : d.inductors)
    j["inductors"].push_back({{"branch", x.branch},
                              {"nodes", {x.nodes.first, x.nodes.second}},
                              {"inductance_h", x.inductance},
                              {"flux_weights", x.flux_weights},
                              {"flux_factors", x.flux_factors}});
  j["warnings"] = d.warnings;
  return j;
}

void write_spectrum_csv(std::ostream& out, const std::string& parameter, std::span<const double> values,
                        const Eigen::MatrixXd& efreqs) {
  out << parameter;
  for (Eigen::Index k = 0; k < efreqs.rows(); ++k) out << ",e" << k << "_hz";
  out << "\n";
  for (std::size_t j = 0; j < values.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    if (efreqs.col(col).hasNaN()) continue;
    out << format_number(values[j]);
    for (Eigen::Index k = 0; k < efreqs.rows(); ++k) out << "," << format_number(efreqs(k, col));
    out << "\n";
  }
}

nlohmann::json spectrum_json(const std::string& parameter, std::span<const double> values, const Eigen::MatrixXd& efreqs) {
  nlohmann::json j;
  j["parameter"] = parameter;
  j["values"] = std::vector<double>(values.begin(), values.end());
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t c = 0; c < values.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (efreqs.col(col).hasNaN()) {
      rows.push_back(nullptr);
      continue;
    }
    rows.push_back(std::vector<double>(efreqs.col(col).data(), efreqs.col(col).data() + efreqs.rows()));
  }
  j["efreqs_hz"] = rows;
  return j;
}

}  // namespace cqe
