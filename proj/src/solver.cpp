#include "cqe/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "cqe/constants.hpp"
#include "cqe/error.hpp"

namespace cqe {

Spectrum diag(const SparseMatrix& h, int n_eig, const EigenOptions& options) {
  EigenResult r = lowest_eigenpairs(h, n_eig, options);
  Spectrum s;
  s.energies = r.values;
  s.efreqs = r.values / constants::h;
  s.evecs = std::move(r.vectors);
  s.residuals = r.residuals;
  s.norm_estimate = r.norm_estimate;
  return s;
}

CircuitSpec with_element_value(const CircuitSpec& spec, const ElementHandle& handle, double magnitude) {
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) throw InputError("element value must be positive and finite");
  CircuitSpec out = spec;
  for (auto& edge : out.edges) {
    if (edge.nodes != handle.nodes) continue;
    if (handle.element < 0 || handle.element >= static_cast<int>(edge.elements.size()))
      throw InputError("edge (" + std::to_string(handle.nodes.first) + "," + std::to_string(handle.nodes.second) +
                       ") has no element " + std::to_string(handle.element));
    std::visit([&](auto& el) { el.value.magnitude = magnitude; }, edge.elements[static_cast<std::size_t>(handle.element)]);
    return out;
  }
  throw InputError("no edge (" + std::to_string(handle.nodes.first) + "," + std::to_string(handle.nodes.second) + ")");
}

Circuit::Circuit(CircuitSpec spec, TreeChoice tree, TransformOptions options)
    : spec_(std::move(spec)), tree_(tree), options_(std::move(options)) {
  tc_ = std::make_shared<const TransformedCircuit>(transform_circuit(build_circuit_matrices(spec_, tree_), options_));
  const auto& part = tc_->partition;
  for (const auto& [mode, ng] : spec_.charge_offsets) {
    (void)ng;
    if (mode < 1 || mode > part.size()) throw InputError("charge offset given for nonexistent mode " + std::to_string(mode));
    if (part.kind(mode - 1) != ModeKind::Charge)
      throw InputError("charge offset given for mode " + std::to_string(mode) + ", which is harmonic");
  }
}

std::vector<std::string> Circuit::warnings() const {
  std::vector<std::string> out = tc_->warnings;
  out.insert(out.end(), basis_warnings_.begin(), basis_warnings_.end());
  return out;
}

void Circuit::set_truncations(std::vector<int> truncations) {
  requested_ = std::move(truncations);
  rebuild_basis();
}

void Circuit::rebuild_basis() {
  basis_warnings_.clear();
  ModeBasis basis = make_basis(*tc_, requested_, spec_.charge_offsets, &basis_warnings_);
  builder_ = std::make_shared<const HamiltonianBuilder>(tc_, std::move(basis));
}

const HamiltonianBuilder& Circuit::builder() const {
  if (!builder_) throw InputError("truncation numbers have not been set");
  return *builder_;
}

const std::vector<int>& Circuit::truncations() const { return builder().basis().truncations; }

void Circuit::set_flux(std::string_view loop, double flux) {
  if (!std::isfinite(flux)) throw InputError("external flux must be finite");
  int idx = spec_.loop_index(loop);
  if (idx < 0) throw InputError("unknown loop '" + std::string(loop) + "'");
  spec_.loops[static_cast<std::size_t>(idx)].external_flux = flux;
}

double Circuit::flux(std::string_view loop) const {
  const LoopDef* l = spec_.find_loop(loop);
  if (!l) throw InputError("unknown loop '" + std::string(loop) + "'");
  return l->external_flux;
}

void Circuit::set_charge_offset(int mode, double offset) {
  const auto& part = tc_->partition;
  if (!std::isfinite(offset)) throw InputError("charge offset must be finite");
  if (mode < 1 || mode > part.size()) throw InputError("mode " + std::to_string(mode) + " does not exist");
  if (part.kind(mode - 1) != ModeKind::Charge)
    throw InputError("mode " + std::to_string(mode) + " is harmonic and has no charge offset");
  spec_.charge_offsets[mode] = offset;
}

HamiltonianParams Circuit::params() const {
  HamiltonianParams p;
  const auto& part = tc_->partition;
  for (const auto& loop : spec_.loops) p.loop_phases.push_back(2.0 * constants::pi * loop.external_flux);
  p.charge_offsets.assign(static_cast<std::size_t>(part.n_charge), 0.0);
  for (const auto& [mode, ng] : spec_.charge_offsets)
    p.charge_offsets[static_cast<std::size_t>(mode - 1 - part.n_harmonic)] = ng;
  for (const auto& br : tc_->matrices.branches)
    p.junction_energies.push_back(br.kind == BranchKind::Junction ? br.value : 0.0);
  return p;
}

SparseMatrix Circuit::hamiltonian(const HamiltonianParams& p) const { return builder().assemble(p); }

Spectrum Circuit::diag(const HamiltonianParams& p, int n_eig) const {
  return cqe::diag(hamiltonian(p), n_eig, eigen_options);
}

SweepTarget SweepTarget::flux(std::string loop) {
  SweepTarget t;
  t.kind = SweepKind::Flux;
  t.loop = std::move(loop);
  return t;
}

SweepTarget SweepTarget::charge_offset(int mode) {
  SweepTarget t;
  t.kind = SweepKind::ChargeOffset;
  t.mode = mode;
  return t;
}

SweepTarget SweepTarget::element_value(ElementHandle handle) {
  SweepTarget t;
  t.kind = SweepKind::Element;
  t.element = handle;
  return t;
}

namespace {

int resolve_threads(int threads, std::size_t points) {
  unsigned n = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(points, 1)));
}

}  // namespace

std::optional<ParallelFailure> parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::mutex fail_mutex;
  std::optional<ParallelFailure> failure;
  auto worker = [&] {
    for (std::size_t j = next++; j < count; j = next++) {
      try {
        fn(j);
      } catch (const std::exception& ex) {
        std::lock_guard lock(fail_mutex);
        if (!failure || j < failure->index) failure = ParallelFailure{j, ex.what()};
      }
    }
  };
  const int n_threads = resolve_threads(threads, count);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return failure;
}

Eigen::MatrixXd sweep(const Circuit& circuit, const SweepTarget& target, std::span<const double> values, int n_eig,
                      int threads) {
  const auto& part = circuit.transformed().partition;
  const HamiltonianParams base = circuit.params();
  int loop_idx = -1;
  switch (target.kind) {
    case SweepKind::Flux:
      loop_idx = circuit.spec().loop_index(target.loop);
      if (loop_idx < 0) throw InputError("unknown loop '" + target.loop + "'");
      break;
    case SweepKind::ChargeOffset:
      if (target.mode < 1 || target.mode > part.size() || part.kind(target.mode - 1) != ModeKind::Charge)
        throw InputError("mode " + std::to_string(target.mode) + " is not a charge mode");
      break;
    case SweepKind::Element:
      with_element_value(circuit.spec(), target.element, 1.0);
      break;
  }
  circuit.builder();

  const std::size_t count = values.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n_eig, static_cast<Eigen::Index>(count),
                                                  std::numeric_limits<double>::quiet_NaN());
  auto point = [&](std::size_t j) {
    const double v = values[j];
    if (target.kind == SweepKind::Element) {
      Circuit local(with_element_value(circuit.spec(), target.element, v), circuit.tree_choice(),
                    circuit.transform_options());
      local.eigen_options = circuit.eigen_options;
      local.set_truncations(circuit.truncations());
      return local.diag(n_eig).efreqs;
    }
    HamiltonianParams p = base;
    if (target.kind == SweepKind::Flux)
      p.loop_phases[static_cast<std::size_t>(loop_idx)] = 2.0 * constants::pi * v;
    else
      p.charge_offsets[static_cast<std::size_t>(target.mode - 1 - part.n_harmonic)] = v;
    return circuit.diag(p, n_eig).efreqs;
  };

  const auto failure = parallel_for(count, threads, [&](std::size_t j) { out.col(static_cast<Eigen::Index>(j)) = point(j); });

  if (failure) {
    const std::size_t fail_index = failure->index;
    for (std::size_t j = fail_index; j < count; ++j) out.col(static_cast<Eigen::Index>(j)).setConstant(std::numeric_limits<double>::quiet_NaN());
    std::ostringstream msg;
    msg << "sweep point " << fail_index << " (value " << values[fail_index] << ") failed: " << failure->message;
    throw SweepError(msg.str(), fail_index, out);
  }
  return out;
}

ConvergenceReport convergence_probe(const Circuit& circuit, int n_eig, const std::vector<std::vector<int>>& schedule,
                                    double tolerance) {
  if (schedule.empty()) throw InputError("convergence schedule is empty");
  ConvergenceReport r;
  r.schedule = schedule;
  r.tolerance = tolerance;
  const auto steps = static_cast<Eigen::Index>(schedule.size());
  r.efreqs.resize(n_eig, steps);
  r.rel_change = Eigen::MatrixXd::Zero(n_eig, steps);
  Circuit local = circuit;
  for (Eigen::Index s = 0; s < steps; ++s) {
    local.set_truncations(schedule[static_cast<std::size_t>(s)]);
    r.efreqs.col(s) = local.diag(n_eig).efreqs;
    if (s == 0) continue;
    const double width = r.efreqs(n_eig - 1, s) - r.efreqs(0, s);
    for (int k = 0; k < n_eig; ++k) {
      const double denom = std::max({std::abs(r.efreqs(k, s)), width, std::numeric_limits<double>::min()});
      r.rel_change(k, s) = std::abs(r.efreqs(k, s) - r.efreqs(k, s - 1)) / denom;
    }
  }
  r.converged.resize(static_cast<std::size_t>(n_eig));
  for (int k = 0; k < n_eig; ++k) r.converged[static_cast<std::size_t>(k)] = steps > 1 && r.rel_change(k, steps - 1) <= tolerance;
  return r;
}

}  // namespace cqe
