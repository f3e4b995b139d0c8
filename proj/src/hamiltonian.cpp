#include "cqe/hamiltonian.hpp"

#include <cmath>
#include <iomanip>

#include "cqe/constants.hpp"
#include "cqe/error.hpp"

namespace cqe {

namespace {

SparseMatrix diagonal(const Eigen::VectorXd& d) {
  SparseMatrix m(d.size(), d.size());
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d(i) != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d(i));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix power(const SparseMatrix& op, int p) {
  SparseMatrix out = identity_op(static_cast<int>(op.rows()));
  for (int i = 0; i < p; ++i) out = SparseMatrix(out * op);
  return out;
}

}  // namespace

long ModeBasis::dim() const {
  long d = 1;
  for (int t : truncations) d *= t;
  return d;
}

ModeBasis make_basis(const TransformedCircuit& tc, std::vector<int> truncations, const std::map<int, double>& offsets,
                     std::vector<std::string>* warnings) {
  const auto& part = tc.partition;
  if (static_cast<int>(truncations.size()) != part.size())
    throw InputError("expected " + std::to_string(part.size()) + " truncation numbers, got " +
                     std::to_string(truncations.size()));
  auto warn = [&](std::string m) {
    if (warnings) warnings->push_back(std::move(m));
  };
  for (int m = 0; m < part.size(); ++m) {
    int& t = truncations[static_cast<std::size_t>(m)];
    if (t < 1) throw InputError("truncation of mode " + std::to_string(m + 1) + " must be at least 1");
    if (part.kind(m) != ModeKind::Charge) continue;
    if (part.frozen[static_cast<std::size_t>(m - part.n_harmonic)]) {
      if (t != 1) warn("charge mode " + std::to_string(m + 1) + " is not coupled to any junction; truncation set to 1");
      t = 1;
    } else if (t % 2 == 0) {
      warn("charge mode " + std::to_string(m + 1) + " truncation rounded up from " + std::to_string(t) + " to " +
           std::to_string(t + 1) + " (symmetric charge window)");
      ++t;
    }
  }
  ModeBasis basis;
  basis.truncations = std::move(truncations);
  basis.charge_offsets.assign(static_cast<std::size_t>(part.n_charge), 0.0);
  for (const auto& [mode, ng] : offsets) {
    if (mode < 1 || mode > part.size()) throw InputError("charge offset given for nonexistent mode " + std::to_string(mode));
    if (part.kind(mode - 1) != ModeKind::Charge)
      throw InputError("charge offset given for mode " + std::to_string(mode) + ", which is harmonic");
    basis.charge_offsets[static_cast<std::size_t>(mode - 1 - part.n_harmonic)] = ng;
  }
  if (basis.dim() > 50'000'000) throw InputError("Hilbert space dimension too large");
  return basis;
}

HamiltonianParams default_params(const TransformedCircuit& tc, const CircuitSpec& spec, const ModeBasis& basis) {
  HamiltonianParams p;
  for (const auto& loop : spec.loops) p.loop_phases.push_back(2.0 * constants::pi * loop.external_flux);
  p.charge_offsets = basis.charge_offsets;
  for (const auto& br : tc.matrices.branches)
    p.junction_energies.push_back(br.kind == BranchKind::Junction ? br.value : 0.0);
  return p;
}

HamiltonianBuilder::HamiltonianBuilder(std::shared_ptr<const TransformedCircuit> tc, ModeBasis basis)
    : tc_(std::move(tc)), basis_(std::move(basis)), dims_(basis_.truncations) {
  using namespace constants;
  const auto& part = tc_->partition;
  if (static_cast<int>(dims_.size()) != part.size()) throw InputError("basis does not match the circuit modes");
  const long dim = basis_.dim();
  const int n = part.size();

  harmonic_diag_ = Eigen::VectorXd::Zero(dim);
  std::vector<long> stride(static_cast<std::size_t>(n), 1);
  for (int m = n - 2; m >= 0; --m) stride[static_cast<std::size_t>(m)] = stride[static_cast<std::size_t>(m) + 1] * dims_[static_cast<std::size_t>(m) + 1];
  for (long i = 0; i < dim; ++i) {
    double e = 0.0;
    for (int m = 0; m < part.n_harmonic; ++m) {
      long level = (i / stride[static_cast<std::size_t>(m)]) % dims_[static_cast<std::size_t>(m)];
      e += hbar * part.omega(m) * static_cast<double>(level);
    }
    harmonic_diag_(i) = e;
  }

  const auto& branches = tc_->matrices.branches;
  junction_ops_.resize(branches.size());
  for (const auto& br : branches)
    if (br.kind == BranchKind::Junction)
      junction_ops_[static_cast<std::size_t>(br.index)] = junction_exponential(br.index, false);
}

Eigen::VectorXd HamiltonianBuilder::harmonic_origin(const HamiltonianParams& params) const {
  using namespace constants;
  const auto& part = tc_->partition;
  const auto& mats = tc_->matrices;
  if (static_cast<int>(params.loop_phases.size()) != mats.num_loops)
    throw InputError("expected " + std::to_string(mats.num_loops) + " loop fluxes, got " +
                     std::to_string(params.loop_phases.size()));
  // Inductive energy per harmonic mode: ½ K Φ² + J Φ, minimum at -J / K.
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(part.n_harmonic);
  for (const auto& br : mats.branches) {
    if (br.kind != BranchKind::Inductor) continue;
    const double theta = mats.branch_flux_phase(br.index, params.loop_phases);
    if (theta == 0.0) continue;
    for (int m = 0; m < part.n_harmonic; ++m) origin(m) += phi0_reduced * theta / br.value * tc_->wtilde(br.index, m);
  }
  for (int m = 0; m < part.n_harmonic; ++m)
    if (origin(m) != 0.0) origin(m) = -origin(m) / tc_->Lstar_tilde(m, m) / phi0_reduced;
  return origin;
}

double HamiltonianBuilder::junction_shift(int branch, const Eigen::VectorXd& origin) const {
  double s = 0.0;
  for (Eigen::Index m = 0; m < origin.size(); ++m) s += tc_->wtilde(branch, m) * origin(m);
  return s;
}

SparseMatrix HamiltonianBuilder::junction_exponential(int branch, bool half) const {
  using namespace constants;
  const auto& part = tc_->partition;
  const double s = half ? 0.5 : 1.0;
  std::vector<SparseMatrix> factors;
  for (int m = 0; m < part.size(); ++m) {
    const int levels = dims_[static_cast<std::size_t>(m)];
    const double w = tc_->wtilde(branch, m);
    if (part.kind(m) == ModeKind::Harmonic) {
      const double kappa = s * 2.0 * pi / Phi0 * w * std::sqrt(hbar * part.impedance(m) / 2.0);
      factors.push_back(kappa == 0.0 ? identity_op(levels) : displacement_op(levels, Complex(0.0, kappa)));
    } else {
      int p = static_cast<int>(w);
      if (half) {
        if (p % 2 != 0) {
          SparseMatrix zero(basis_.dim(), basis_.dim());
          return zero;
        }
        p /= 2;
      }
      SparseMatrix d = charge_raise_op(levels);
      factors.push_back(p >= 0 ? power(d, p) : power(SparseMatrix(d.adjoint()), -p));
    }
  }
  return kron_chain(factors);
}

SparseMatrix HamiltonianBuilder::branch_flux(int branch) const {
  const auto& part = tc_->partition;
  SparseMatrix out(basis_.dim(), basis_.dim());
  for (int m = 0; m < part.n_harmonic; ++m) {
    const double w = tc_->wtilde(branch, m);
    if (w != 0.0) out += w * mode_flux(m);
  }
  return out;
}

SparseMatrix HamiltonianBuilder::mode_flux(int mode) const {
  using namespace constants;
  const auto& part = tc_->partition;
  if (mode < 0 || mode >= part.size()) throw InputError("mode index out of range");
  if (part.kind(mode) != ModeKind::Harmonic)
    throw InputError("the flux of charge mode " + std::to_string(mode + 1) + " has no representation in the charge basis");
  const int levels = dims_[static_cast<std::size_t>(mode)];
  SparseMatrix a = annihilation_op(levels);
  SparseMatrix x = std::sqrt(hbar * part.impedance(mode) / 2.0) * (a + SparseMatrix(a.adjoint()));
  return lift(x, mode, dims_);
}

SparseMatrix HamiltonianBuilder::mode_charge(int mode, std::span<const double> charge_offsets) const {
  using namespace constants;
  const auto& part = tc_->partition;
  if (mode < 0 || mode >= part.size()) throw InputError("mode index out of range");
  const int levels = dims_[static_cast<std::size_t>(mode)];
  if (part.kind(mode) == ModeKind::Harmonic) {
    SparseMatrix a = annihilation_op(levels);
    SparseMatrix q = Complex(0.0, std::sqrt(hbar / (2.0 * part.impedance(mode)))) * (SparseMatrix(a.adjoint()) - a);
    return lift(q, mode, dims_);
  }
  const double ng = charge_offsets[static_cast<std::size_t>(mode - part.n_harmonic)];
  return lift(charge_op(levels, ng), mode, dims_);
}

SparseMatrix HamiltonianBuilder::assemble(const HamiltonianParams& params) const {
  using namespace constants;
  const auto& part = tc_->partition;
  const auto& mats = tc_->matrices;
  if (static_cast<int>(params.loop_phases.size()) != mats.num_loops)
    throw InputError("expected " + std::to_string(mats.num_loops) + " loop fluxes, got " +
                     std::to_string(params.loop_phases.size()));
  if (static_cast<int>(params.charge_offsets.size()) != part.n_charge) throw InputError("charge offset count mismatch");
  if (params.junction_energies.size() != mats.branches.size()) throw InputError("junction energy count mismatch");

  const long dim = basis_.dim();
  const int n = part.size();
  const int nh = part.n_harmonic;
  const Eigen::MatrixXd einv = tc_->charge_inverse_capacitance();

  // Completing the square in each harmonic mode leaves ½ K Φ² around the
  // origin and lowers the constant by ½ K origin².
  const Eigen::VectorXd origin = harmonic_origin(params);
  double constant = 0.0;
  for (const auto& br : mats.branches) {
    if (br.kind != BranchKind::Inductor) continue;
    const double theta = mats.branch_flux_phase(br.index, params.loop_phases);
    constant += 0.5 * std::pow(phi0_reduced * theta, 2) / br.value;
  }
  for (int m = 0; m < nh; ++m) constant -= 0.5 * tc_->Lstar_tilde(m, m) * std::pow(phi0_reduced * origin(m), 2);

  Eigen::VectorXd diag = harmonic_diag_.array() + constant;
  if (part.n_charge > 0) {
    std::vector<long> stride(static_cast<std::size_t>(n), 1);
    for (int m = n - 2; m >= 0; --m)
      stride[static_cast<std::size_t>(m)] = stride[static_cast<std::size_t>(m) + 1] * dims_[static_cast<std::size_t>(m) + 1];
    Eigen::VectorXd q(part.n_charge);
    for (long i = 0; i < dim; ++i) {
      for (int c = 0; c < part.n_charge; ++c) {
        const int m = nh + c;
        const int levels = dims_[static_cast<std::size_t>(m)];
        const long k = (i / stride[static_cast<std::size_t>(m)]) % levels;
        const int number = levels == 1 ? 0 : charge_number(static_cast<int>(k), levels);
        q(c) = 2.0 * e * (number + params.charge_offsets[static_cast<std::size_t>(c)]);
      }
      diag(i) += 0.5 * q.dot(einv * q);
    }
  }

  SparseMatrix h = diagonal(diag);
  for (const auto& br : mats.branches) {
    const auto k = static_cast<std::size_t>(br.index);
    if (br.kind == BranchKind::Junction) {
      const double theta = mats.branch_flux_phase(br.index, params.loop_phases) + junction_shift(br.index, origin);
      const double ej = params.junction_energies[k];
      if (ej == 0.0) continue;
      SparseMatrix t = (-0.5 * ej * std::exp(Complex(0.0, theta))) * junction_ops_[k];
      h += t;
      h += SparseMatrix(t.adjoint());
    }
  }
  h.makeCompressed();
  return h;
}

SparseMatrix assemble_hamiltonian(const TransformedCircuit& tc, const ModeBasis& basis, const HamiltonianParams& params) {
  std::shared_ptr<const TransformedCircuit> view(&tc, [](const TransformedCircuit*) {});
  return HamiltonianBuilder(view, basis).assemble(params);
}

void write_triplets_csv(std::ostream& out, const SparseMatrix& h) {
  out << "row,col,real_hz,imag_hz\n";
  out << std::setprecision(17);
  for (int k = 0; k < h.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(h, k); it; ++it)
      out << it.row() << "," << it.col() << "," << it.value().real() / constants::h << ","
          << it.value().imag() / constants::h << "\n";
}

}  // namespace cqe
