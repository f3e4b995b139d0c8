// Command-line front end of the circuit quantization engine.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqe/constants.hpp"
#include "cqe/coupling.hpp"
#include "cqe/error.hpp"
#include "cqe/netlist.hpp"
#include "cqe/noise.hpp"
#include "cqe/report.hpp"
#include "cqe/solver.hpp"
#include "cqe/wavefunction.hpp"

namespace {

using cqe::InputError;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_numerical = 3;

// Options shared by every command.
struct Common {
  std::string netlist;
  std::vector<int> trunc;
  int n_eig = 5;
  std::vector<std::string> flux;  // loop=value
  std::vector<std::string> ng;    // mode=value
  std::optional<double> temperature;
  int threads = 1;
  std::optional<double> tolerance;
  std::string tree = "default";
  std::string flux_dist;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c, bool needs_trunc) {
  cmd->add_option("netlist", c.netlist, "Circuit netlist file")->required()->check(CLI::ExistingFile);
  auto* t = cmd->add_option("--trunc", c.trunc, "Truncation per mode, comma separated (e.g. 25,1,25)")
                ->delimiter(',')
                ->envname("CQE_TRUNC");
  if (needs_trunc) t->required();
  cmd->add_option("--n-eig", c.n_eig, "Number of eigenpairs")->envname("CQE_N_EIG")->check(CLI::PositiveNumber);
  cmd->add_option("--flux", c.flux, "External flux of a loop in units of flux quanta, loop=value (repeatable)");
  cmd->add_option("--ng", c.ng, "Charge offset of a charge mode in units of 2e, mode=value (repeatable)");
  cmd->add_option("--temp", c.temperature, "Bath temperature in kelvin")->envname("CQE_TEMP");
  cmd->add_option("--threads", c.threads, "Worker threads for sweeps (0 = all cores)")
      ->envname("CQE_THREADS")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--tol", c.tolerance, "Relative eigensolver residual tolerance")->envname("CQE_TOL");
  cmd->add_option("--tree", c.tree, "Spanning tree choice")->check(CLI::IsMember({"default", "reversed"}));
  cmd->add_option("--flux-dist", c.flux_dist, "Override the flux distribution")
      ->check(CLI::IsMember({"junctions", "all"}));
  cmd->add_option("-o,--out", c.out, "Output file (default: standard output)");
}

std::pair<std::string, double> split_assignment(const std::string& s, const std::string& what) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError(what + " must look like name=value, got '" + s + "'");
  try {
    std::size_t used = 0;
    const std::string rhs = s.substr(eq + 1);
    const double v = std::stod(rhs, &used);
    if (used != rhs.size()) throw std::invalid_argument(rhs);
    return {s.substr(0, eq), v};
  } catch (const std::logic_error&) {
    throw InputError(what + ": invalid number in '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw InputError(what + ": expected an integer, got '" + s + "'");
  }
}

// Accepts plain numbers and multiples of pi: "pi", "-pi/2", "3pi/2", "0.5*pi".
double parse_angle(std::string s) {
  std::erase_if(s, [](unsigned char ch) { return std::isspace(ch); });
  if (s.empty()) throw InputError("empty grid value");
  const auto p = s.find("pi");
  try {
    if (p == std::string::npos) {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    }
    std::string coef = s.substr(0, p);
    std::string rest = s.substr(p + 2);
    if (!coef.empty() && coef.back() == '*') coef.pop_back();
    double factor = 1.0;
    if (coef == "-") factor = -1.0;
    else if (coef == "+" || coef.empty()) factor = 1.0;
    else {
      std::size_t used = 0;
      factor = std::stod(coef, &used);
      if (used != coef.size()) throw std::invalid_argument(coef);
    }
    double den = 1.0;
    if (!rest.empty()) {
      if (rest[0] != '/') throw std::invalid_argument(rest);
      std::size_t used = 0;
      den = std::stod(rest.substr(1), &used);
      if (used != rest.size() - 1 || den == 0.0) throw std::invalid_argument(rest);
    }
    return factor * cqe::constants::pi / den;
  } catch (const std::logic_error&) {
    throw InputError("cannot read grid value '" + s + "'");
  }
}

// "start:stop:count" (inclusive endpoints) or a single value.
std::vector<double> parse_range(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() == 1) return {parse_angle(parts[0])};
  if (parts.size() != 3) throw InputError("range must be start:stop:count or a single value, got '" + s + "'");
  const double a = parse_angle(parts[0]);
  const double b = parse_angle(parts[1]);
  const int n = parse_int(parts[2], "range count");
  if (n < 1) throw InputError("range count must be positive");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  if (n > 1) v.back() = b;
  return v;
}

cqe::Circuit build_circuit(const Common& c) {
  cqe::CircuitSpec spec = cqe::load_netlist(c.netlist);
  if (c.temperature) {
    if (!(*c.temperature > 0.0)) throw InputError("temperature must be positive");
    spec.environment.temperature = *c.temperature;
  }
  if (c.flux_dist == "junctions") spec.flux_dist = cqe::FluxDistribution::Junctions;
  if (c.flux_dist == "all") spec.flux_dist = cqe::FluxDistribution::All;
  cqe::Circuit circuit(std::move(spec), c.tree == "reversed" ? cqe::TreeChoice::Reversed : cqe::TreeChoice::Default);
  for (const auto& f : c.flux) {
    auto [loop, v] = split_assignment(f, "--flux");
    circuit.set_flux(loop, v);
  }
  for (const auto& g : c.ng) {
    auto [mode, v] = split_assignment(g, "--ng");
    circuit.set_charge_offset(parse_int(mode, "--ng mode"), v);
  }
  if (c.tolerance) {
    if (!(*c.tolerance > 0.0)) throw InputError("tolerance must be positive");
    circuit.eigen_options.tolerance = *c.tolerance;
  }
  if (!c.trunc.empty()) circuit.set_truncations(c.trunc);
  return circuit;
}

// Writes to the file named by `path`, or to stdout when it is empty.
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw InputError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }

 private:
  std::string path_;
  std::ofstream file_;
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f << text;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct SweepSpec {
  std::string parameter;  // column header
  cqe::SweepTarget target;
};

// flux:<loop> | ng:<mode> | element:<i>,<j>[,<k>]
SweepSpec parse_sweep(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InputError("sweep must be flux:<loop>, ng:<mode> or element:<i>,<j>[,<k>]");
  const std::string kind = s.substr(0, colon);
  const std::string arg = s.substr(colon + 1);
  if (kind == "flux") return {"flux_" + arg, cqe::SweepTarget::flux(arg)};
  if (kind == "ng") return {"ng_" + arg, cqe::SweepTarget::charge_offset(parse_int(arg, "sweep mode"))};
  if (kind == "element") {
    std::vector<int> idx;
    std::stringstream ss(arg);
    for (std::string item; std::getline(ss, item, ',');) idx.push_back(parse_int(item, "sweep element"));
    if (idx.size() != 2 && idx.size() != 3) throw InputError("element sweep needs <i>,<j>[,<k>]");
    cqe::ElementHandle h{cqe::NodePair::make(idx[0], idx[1]), idx.size() == 3 ? idx[2] : 0};
    return {"element_" + std::to_string(h.nodes.first) + "_" + std::to_string(h.nodes.second) + "_" +
                std::to_string(h.element),
            cqe::SweepTarget::element_value(h)};
  }
  throw InputError("unknown sweep kind '" + kind + "'");
}

void apply_point(cqe::Circuit& circuit, const cqe::SweepTarget& target, double v) {
  switch (target.kind) {
    case cqe::SweepKind::Flux: circuit.set_flux(target.loop, v); break;
    case cqe::SweepKind::ChargeOffset: circuit.set_charge_offset(target.mode, v); break;
    case cqe::SweepKind::Element: break;
  }
}

// ---------------------------------------------------------------- describe

int run_describe(const Common& c) {
  const cqe::Circuit circuit = build_circuit(c);
  const cqe::Description d = cqe::describe(circuit);
  Output out(c.out);
  if (c.format == "json")
    out.stream() << cqe::describe_json(d).dump(2) << "\n";
  else
    out.stream() << cqe::describe_text(d);
  return exit_ok;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
  std::string sweep;
  std::string values;
  std::string json_out;
  std::string plot_script;
};

std::string gnuplot_script(const std::string& csv, const std::string& parameter, int n_eig) {
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set xlabel '" << parameter << "'\n"
    << "set ylabel 'E_k - E_0 (GHz)'\n"
    << "plot";
  for (int k = 1; k < n_eig; ++k)
    s << (k > 1 ? "," : "") << " '" << csv << "' using 1:(($" << k + 2 << " - $2) / 1e9) with lines title 'k = " << k
      << "'";
  s << "\n";
  return s.str();
}

int run_spectrum(const Common& c, const SpectrumArgs& a) {
  cqe::Circuit circuit = build_circuit(c);
  print_warnings(circuit.warnings());
  if (a.sweep.empty() != a.values.empty()) throw InputError("--sweep and --values go together");

  std::string parameter = "point";
  std::vector<double> values{0.0};
  std::optional<SweepSpec> sweep;
  if (!a.sweep.empty()) {
    sweep = parse_sweep(a.sweep);
    parameter = sweep->parameter;
    values = parse_range(a.values);
  }

  Eigen::MatrixXd efreqs;
  std::optional<cqe::SweepError> failure;
  try {
    if (sweep)
      efreqs = cqe::sweep(circuit, sweep->target, values, c.n_eig, c.threads);
    else
      efreqs = circuit.diag(c.n_eig).efreqs;
  } catch (const cqe::SweepError& e) {
    failure = e;
    efreqs = e.partial();
  }

  {
    Output out(c.out);
    cqe::write_spectrum_csv(out.stream(), parameter, values, efreqs);
  }
  if (!a.json_out.empty()) write_text_file(a.json_out, cqe::spectrum_json(parameter, values, efreqs).dump(2) + "\n");
  if (!a.plot_script.empty()) {
    if (c.out.empty()) throw InputError("--plot-script needs --out so the script can refer to the data file");
    write_text_file(a.plot_script, gnuplot_script(std::filesystem::path(c.out).filename().string(), parameter, c.n_eig));
  }
  if (failure) {
    json manifest{{"status", "failed"},
                  {"failed_index", failure->index()},
                  {"failed_value", values[failure->index()]},
                  {"completed_points", failure->index()},
                  {"total_points", values.size()},
                  {"message", failure->what()}};
    const std::string path = c.out.empty() ? std::string("spectrum.manifest.json") : c.out + ".manifest.json";
    write_text_file(path, manifest.dump(2) + "\n");
    std::cerr << "error: " << failure->what() << "\npartial results written; manifest: " << path << "\n";
    return exit_numerical;
  }
  return exit_ok;
}

// ------------------------------------------------------------ wavefunction

struct WavefunctionArgs {
  int state = 0;
  std::string grid;
  bool components = false;
  std::string binary;
};

int run_wavefunction(const Common& c, const WavefunctionArgs& a) {
  cqe::Circuit circuit = build_circuit(c);
  print_warnings(circuit.warnings());
  if (a.state < 0 || a.state >= c.n_eig) throw InputError("--state must be below --n-eig");

  cqe::PhaseGrid grid;
  std::stringstream ss(a.grid);
  for (std::string item; std::getline(ss, item, ',');) {
    std::vector<double> r = parse_range(item);
    if (item.find(':') == std::string::npos)
      grid.axes.emplace_back(r[0]);
    else
      grid.axes.emplace_back(std::move(r));
  }
  const int modes = circuit.transformed().modes();
  if (static_cast<int>(grid.axes.size()) != modes)
    throw InputError("grid has " + std::to_string(grid.axes.size()) + " entries but the circuit has " +
                     std::to_string(modes) + " modes");

  const cqe::Spectrum spec = circuit.diag(c.n_eig);
  const cqe::GridValues g =
      cqe::eig_phase_coord(spec.evecs.col(a.state), circuit.transformed(), circuit.builder().basis(), grid,
                           circuit.builder().harmonic_origin(circuit.params()));

  std::vector<const std::vector<double>*> arrays;
  std::vector<int> array_modes;
  for (int m = 0; m < modes; ++m)
    if (const auto* v = std::get_if<std::vector<double>>(&grid.axes[static_cast<std::size_t>(m)])) {
      arrays.push_back(v);
      array_modes.push_back(m + 1);
    }

  // Riemann sum of |ψ|² over the array axes (uniform spacing assumed).
  double cell = 1.0;
  for (const auto* v : arrays)
    if (v->size() > 1) cell *= (v->back() - v->front()) / static_cast<double>(v->size() - 1);
  double norm = 0.0;
  for (const auto& z : g.values) norm += std::norm(z);
  norm *= cell;

  {
    Output out(c.out);
    auto& os = out.stream();
    for (int m : array_modes) os << "phi" << m << ",";
    os << "abs2";
    if (a.components) os << ",re,im";
    os << "\n";
    std::vector<std::size_t> idx(arrays.size(), 0);
    for (std::size_t flat = 0; flat < g.values.size(); ++flat) {
      std::size_t rem = flat;
      for (std::size_t ax = arrays.size(); ax-- > 0;) {
        idx[ax] = rem % arrays[ax]->size();
        rem /= arrays[ax]->size();
      }
      for (std::size_t ax = 0; ax < arrays.size(); ++ax) os << cqe::format_number((*arrays[ax])[idx[ax]]) << ",";
      const cqe::Complex z = g.values[flat];
      os << cqe::format_number(std::norm(z));
      if (a.components) os << "," << cqe::format_number(z.real()) << "," << cqe::format_number(z.imag());
      os << "\n";
    }
  }

  if (!a.binary.empty()) {
    std::ofstream bin(a.binary, std::ios::binary);
    if (!bin) throw InputError("cannot open '" + a.binary + "' for writing");
    std::vector<std::string> fields{"abs2"};
    if (a.components) fields = {"abs2", "re", "im"};
    for (const auto& z : g.values) {
      const double rec[3] = {std::norm(z), z.real(), z.imag()};
      bin.write(reinterpret_cast<const char*>(rec), static_cast<std::streamsize>(sizeof(double) * fields.size()));
    }
    std::vector<int> shape = g.shape;
    shape.push_back(static_cast<int>(fields.size()));
    json axes = json::array();
    for (std::size_t ax = 0; ax < arrays.size(); ++ax) axes.push_back({{"mode", array_modes[ax]}, {"values", *arrays[ax]}});
    json header{{"dtype", "float64"},
                {"byte_order", "little"},
                {"order", "row-major"},
                {"shape", shape},
                {"fields", fields},
                {"axes", axes},
                {"state", a.state},
                {"riemann_norm", norm}};
    write_text_file(a.binary + ".json", header.dump(2) + "\n");
  }
  std::cerr << "riemann sum of |psi|^2: " << cqe::format_number(norm) << "\n";
  return exit_ok;
}

// ---------------------------------------------------------- matrix-element

struct MatrixElementArgs {
  std::string type;
  std::vector<int> nodes;
  std::vector<int> states;
};

int run_matrix_element(const Common& c, const MatrixElementArgs& a) {
  cqe::Circuit circuit = build_circuit(c);
  print_warnings(circuit.warnings());
  if (a.nodes.size() != 2) throw InputError("--nodes takes two node indices");
  if (a.states.size() != 2) throw InputError("--states takes two state indices");
  for (int s : a.states)
    if (s < 0 || s >= c.n_eig) throw InputError("--states must be below --n-eig");
  const auto kind = a.type == "capacitive" ? cqe::CouplingKind::Capacitive : cqe::CouplingKind::Inductive;
  const cqe::SparseMatrix op = cqe::coupling_op(circuit, kind, {a.nodes[0], a.nodes[1]});
  const cqe::Spectrum spec = circuit.diag(c.n_eig);
  const cqe::Complex v = cqe::matrix_element(op, spec, a.states[0], a.states[1]);
  json j{{"type", a.type},
         {"nodes", a.nodes},
         {"states", a.states},
         {"unit", kind == cqe::CouplingKind::Capacitive ? "V" : "A"},
         {"re", v.real()},
         {"im", v.imag()},
         {"abs", std::abs(v)},
         {"transition_frequency_hz", spec.efreqs(a.states[1]) - spec.efreqs(a.states[0])}};
  Output out(c.out);
  out.stream() << j.dump(2) << "\n";
  return exit_ok;
}

// ------------------------------------------------------------ decoherence

struct DecoherenceArgs {
  std::string channel;
  std::vector<int> states;
  bool total = false;
  bool check_balance = false;
  std::string sweep;
  std::string values;
};

json rate_json(const cqe::RateResult& r) {
  json contributions = json::array();
  for (const auto& x : r.contributions) {
    json e{{"source", x.source}, {"rate_per_s", x.rate}};
    if (x.downward != 0.0 || x.upward != 0.0) {
      e["downward_per_s"] = x.downward;
      e["upward_per_s"] = x.upward;
    }
    if (x.amplitude != 0.0) {
      e["amplitude"] = x.amplitude;
      e["first_derivative"] = x.first_derivative;
      e["second_derivative"] = x.second_derivative;
    }
    contributions.push_back(e);
  }
  return json{{"channel", r.channel},
              {"states", {r.m, r.n}},
              {"direction", std::string(cqe::to_string(r.direction))},
              {"omega_rad_s", r.omega},
              {"rate_per_s", r.rate},
              {"time_s", r.rate > 0.0 ? 1.0 / r.rate : std::numeric_limits<double>::infinity()},
              {"downward_per_s", r.downward},
              {"upward_per_s", r.upward},
              {"contributions", contributions},
              {"warnings", r.warnings}};
}

cqe::RateResult evaluate_rate(const cqe::Circuit& circuit, const std::string& channel, int m, int n, bool total,
                              int n_eig) {
  if (channel == "cc") return cqe::dephasing_rate(circuit, cqe::DephasingChannel::CriticalCurrent, m, n);
  if (channel == "charge") return cqe::dephasing_rate(circuit, cqe::DephasingChannel::Charge, m, n);
  if (channel == "flux") return cqe::dephasing_rate(circuit, cqe::DephasingChannel::Flux, m, n);
  const auto ch = channel == "capacitive" ? cqe::DecayChannel::Capacitive
                  : channel == "inductive" ? cqe::DecayChannel::Inductive
                                           : cqe::DecayChannel::Quasiparticle;
  const cqe::Spectrum spec = circuit.diag(n_eig);
  return cqe::decay_rate(circuit, spec, ch, m, n, total);
}

int run_decoherence(const Common& c, const DecoherenceArgs& a) {
  cqe::Circuit circuit = build_circuit(c);
  print_warnings(circuit.warnings());
  if (a.states.size() != 2) throw InputError("--states takes two state indices");
  const int m = a.states[0];
  const int n = a.states[1];
  const int n_eig = std::max(c.n_eig, std::max(m, n) + 1);
  if (a.sweep.empty() != a.values.empty()) throw InputError("--sweep and --values go together");

  if (a.sweep.empty()) {
    const cqe::RateResult r = evaluate_rate(circuit, a.channel, m, n, a.total, n_eig);
    json j = rate_json(r);
    if (a.check_balance) {
      if (a.channel != "capacitive" && a.channel != "inductive" && a.channel != "quasiparticle")
        throw InputError("--check-balance applies to decay channels only");
      const double t = circuit.spec().environment.temperature;
      j["detailed_balance"] = {
          {"ratio_up_down", r.upward / r.downward},
          {"boltzmann_factor", std::exp(-cqe::constants::hbar * std::abs(r.omega) / (cqe::constants::k_B * t))},
          {"temperature_k", t}};
    }
    Output out(c.out);
    out.stream() << j.dump(2) << "\n";
    print_warnings(r.warnings);
    return exit_ok;
  }

  const SweepSpec sweep = parse_sweep(a.sweep);
  if (sweep.target.kind == cqe::SweepKind::Element) throw InputError("decoherence sweeps support flux and ng only");
  const std::vector<double> values = parse_range(a.values);
  std::vector<double> times(values.size(), std::numeric_limits<double>::quiet_NaN());
  const auto failure = cqe::parallel_for(values.size(), c.threads, [&](std::size_t j) {
    cqe::Circuit local = circuit;
    apply_point(local, sweep.target, values[j]);
    const cqe::RateResult r = evaluate_rate(local, a.channel, m, n, a.total, n_eig);
    times[j] = r.rate > 0.0 ? 1.0 / r.rate : std::numeric_limits<double>::infinity();
  });
  const std::size_t stop = failure ? failure->index : values.size();
  {
    Output out(c.out);
    out.stream() << sweep.parameter << ",time_s\n";
    for (std::size_t j = 0; j < stop; ++j)
      out.stream() << cqe::format_number(values[j]) << "," << cqe::format_number(times[j]) << "\n";
  }
  if (failure) {
    json manifest{{"status", "failed"},
                  {"failed_index", failure->index},
                  {"failed_value", values[failure->index]},
                  {"completed_points", failure->index},
                  {"total_points", values.size()},
                  {"message", failure->message}};
    const std::string path = c.out.empty() ? std::string("decoherence.manifest.json") : c.out + ".manifest.json";
    write_text_file(path, manifest.dump(2) + "\n");
    std::cerr << "error: sweep point " << failure->index << " failed: " << failure->message
              << "\npartial results written; manifest: " << path << "\n";
    return exit_numerical;
  }
  return exit_ok;
}

// ---------------------------------------------------------- dump-matrices

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path.string() + "' for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) f << (j ? "," : "") << cqe::format_number(m(i, j));
    f << "\n";
  }
}

int run_dump(const Common& c, const std::string& dir) {
  cqe::Circuit circuit = build_circuit(c);
  print_warnings(circuit.warnings());
  std::filesystem::create_directories(dir);
  const auto& tc = circuit.transformed();
  const auto& mats = tc.matrices;
  const std::filesystem::path d(dir);
  write_matrix_csv(d / "C.csv", mats.C);
  write_matrix_csv(d / "Lstar.csv", mats.Lstar);
  write_matrix_csv(d / "W.csv", mats.W);
  write_matrix_csv(d / "B.csv", mats.B);
  write_matrix_csv(d / "G.csv", mats.G);
  write_matrix_csv(d / "S.csv", tc.S);
  write_matrix_csv(d / "R.csv", tc.R);
  write_matrix_csv(d / "Cinv_tilde.csv", tc.Cinv_tilde);
  write_matrix_csv(d / "Lstar_tilde.csv", tc.Lstar_tilde);
  write_matrix_csv(d / "wtilde.csv", tc.wtilde);
  if (circuit.has_truncations()) {
    std::ofstream f(d / "H.csv", std::ios::binary);
    cqe::write_triplets_csv(f, circuit.hamiltonian());
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cqe: quantize superconducting circuits described by a netlist"};
  app.require_subcommand(1);
  app.footer(
      "Examples:\n"
      "  cqe describe circuits/zero_pi.net\n"
      "  cqe spectrum circuits/zero_pi.net --trunc 25,1,25 --n-eig 5 --sweep flux:loop1 --values 0:1:100 -o zp.csv\n"
      "  cqe wavefunction circuits/zero_pi.net --trunc 25,1,25 --state 0 --grid '-pi:pi:100,0,-pi/2:3pi/2:100'\n"
      "  cqe matrix-element circuits/fluxonium.net --trunc 100 --type capacitive --nodes 1,0 --states 0,1\n"
      "  cqe decoherence circuits/fluxonium.net --trunc 100 --channel capacitive --states 0,1 --total\n"
      "  cqe dump-matrices circuits/two_loop.net --out-dir dump\n"
      "Exit codes: 0 success, 2 input error, 3 numerical failure.\n"
      "Environment: CQE_TRUNC, CQE_N_EIG, CQE_TEMP, CQE_THREADS, CQE_TOL (flags take precedence).");

  Common common;

  auto* describe = app.add_subcommand("describe", "Print the transformed Hamiltonian and its mode structure");
  add_common(describe, common, false);
  describe->add_option("--format", common.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  SpectrumArgs spectrum_args;
  auto* spectrum = app.add_subcommand("spectrum", "Eigenfrequencies at one point or along a sweep (CSV)");
  add_common(spectrum, common, true);
  spectrum->add_option("--sweep", spectrum_args.sweep, "flux:<loop>, ng:<mode> or element:<i>,<j>[,<k>]");
  spectrum->add_option("--values", spectrum_args.values, "Sweep values as start:stop:count or a single value");
  spectrum->add_option("--json", spectrum_args.json_out, "Also write the results as JSON to this file");
  spectrum->add_option("--plot-script", spectrum_args.plot_script, "Write a gnuplot script for the CSV output");

  WavefunctionArgs wf_args;
  auto* wavefunction = app.add_subcommand("wavefunction", "Eigenstate in mode-phase coordinates on a grid");
  add_common(wavefunction, common, true);
  wavefunction->add_option("--state", wf_args.state, "Eigenstate index (0 = ground)");
  wavefunction
      ->add_option("--grid", wf_args.grid, "Per mode start:stop:count or a fixed phase, comma separated; pi allowed")
      ->required();
  wavefunction->add_flag("--components", wf_args.components, "Also write real and imaginary parts");
  wavefunction->add_option("--binary", wf_args.binary, "Also write a flat float64 file with a .json header");

  MatrixElementArgs me_args;
  auto* matrix = app.add_subcommand("matrix-element", "Drive-coupling matrix element between two eigenstates (JSON)");
  add_common(matrix, common, true);
  matrix->add_option("--type", me_args.type, "capacitive or inductive")
      ->required()
      ->check(CLI::IsMember({"capacitive", "inductive"}));
  matrix->add_option("--nodes", me_args.nodes, "Node pair i,j")->required()->delimiter(',');
  matrix->add_option("--states", me_args.states, "State pair m,n")->required()->delimiter(',');

  DecoherenceArgs dec_args;
  auto* decoherence = app.add_subcommand("decoherence", "Decay or dephasing rate between two eigenstates");
  add_common(decoherence, common, true);
  decoherence->add_option("--channel", dec_args.channel, "capacitive|inductive|quasiparticle|cc|charge|flux")
      ->required()
      ->check(CLI::IsMember({"capacitive", "inductive", "quasiparticle", "cc", "charge", "flux"}));
  decoherence->add_option("--states", dec_args.states, "State pair m,n")->required()->delimiter(',');
  decoherence->add_flag("--total", dec_args.total, "Sum the downward and upward rates (decay channels)");
  decoherence->add_flag("--check-balance", dec_args.check_balance,
                        "Report the upward/downward ratio next to the Boltzmann factor");
  decoherence->add_option("--sweep", dec_args.sweep, "flux:<loop> or ng:<mode>; writes a parameter,time CSV");
  decoherence->add_option("--values", dec_args.values, "Sweep values as start:stop:count or a single value");

  std::string dump_dir;
  auto* dump = app.add_subcommand("dump-matrices", "Write the circuit and transformation matrices as CSV files");
  add_common(dump, common, false);
  dump->add_option("--out-dir", dump_dir, "Destination directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_input;
  }

  try {
    if (*describe) return run_describe(common);
    if (*spectrum) return run_spectrum(common, spectrum_args);
    if (*wavefunction) return run_wavefunction(common, wf_args);
    if (*matrix) return run_matrix_element(common, me_args);
    if (*decoherence) return run_decoherence(common, dec_args);
    if (*dump) return run_dump(common, dump_dir);
  } catch (const cqe::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return exit_input;
  } catch (const cqe::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_input;
}
