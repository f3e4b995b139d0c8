#include "cqe/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cqe/constants.hpp"
#include "cqe/error.hpp"

namespace cqe {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Column-style Hermite reduction: returns a basis (rows x rows, lower
// triangular) of the integer lattice generated by the columns of `m`.
Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> lattice_basis(
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = i + 1; j < cols; ++j) {
      while (m(i, j) != 0) {
        std::int64_t q = m(i, i) / m(i, j);
        m.col(i) -= q * m.col(j);
        m.col(i).swap(m.col(j));
      }
    }
    if (m(i, i) == 0) throw NumericalError("charge lattice is rank deficient");
    if (m(i, i) < 0) m.col(i) = -m.col(i);
  }
  return m.leftCols(rows);
}

bool near_integer(const Mat& x, double tol) {
  return ((x.array() - x.array().round()).abs() <= tol).all();
}

}  // namespace

FirstTransformation first_transformation(const Mat& C, const Mat& Lstar, const std::vector<InductiveBranch>& branches,
                                         const TransformOptions& options) {
  const Eigen::Index n = C.rows();
  Eigen::SelfAdjointEigenSolver<Mat> ce(C);
  const Vec& lam = ce.eigenvalues();
  if (n == 0) throw InputError("circuit has no nodes");
  if (!(lam.minCoeff() > 0.0) || lam.maxCoeff() / lam.minCoeff() > options.condition_limit)
    throw InputError("capacitance matrix is singular or ill-conditioned; every node needs a capacitive path to ground");
  const Mat& q = ce.eigenvectors();
  Mat sqrt_c = q * lam.cwiseSqrt().asDiagonal() * q.transpose();
  Mat sqrt_c_inv = q * lam.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();

  Eigen::SelfAdjointEigenSolver<Mat> le(Lstar);
  Vec mu = le.eigenvalues();
  const double mu_max = std::max(mu.cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu(i) < 1e-12 * mu_max) mu(i) = 0.0;
  Mat sqrt_l = le.eigenvectors() * mu.cwiseSqrt().asDiagonal() * le.eigenvectors().transpose();

  // sqrt(L*) sqrt(C)^-1 = V D Uᵀ; the node-side factor is the right singular basis.
  Eigen::JacobiSVD<Mat> svd(sqrt_l * sqrt_c_inv, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& sigma = svd.singularValues();
  const Mat& u = svd.matrixV();
  const double sigma_max = sigma.size() ? sigma(0) : 0.0;

  std::vector<Eigen::Index> harmonic;
  std::vector<Eigen::Index> charge;
  for (Eigen::Index i = 0; i < n; ++i)
    (sigma_max > 0.0 && sigma(i) >= options.zero_tolerance * sigma_max ? harmonic : charge).push_back(i);
  std::stable_sort(harmonic.begin(), harmonic.end(), [&](auto a, auto b) { return sigma(a) > sigma(b); });

  FirstTransformation out;
  out.S1.resize(n, n);
  out.R1.resize(n, n);
  out.singular_values.resize(n);
  auto& part = out.partition;
  part.n_harmonic = static_cast<int>(harmonic.size());
  part.n_charge = static_cast<int>(charge.size());
  part.omega.resize(part.n_harmonic);
  part.impedance.resize(part.n_harmonic);
  if (options.harmonic_rescale && options.harmonic_rescale->size() != part.n_harmonic)
    throw InputError("harmonic rescale vector has the wrong length");

  Eigen::Index mode = 0;
  auto place = [&](Eigen::Index src, double scale) {
    out.S1.col(mode) = sqrt_c_inv * u.col(src) * scale;
    out.R1.col(mode) = sqrt_c * u.col(src) / scale;
    out.singular_values(mode) = sigma(src);
    ++mode;
  };
  for (auto src : harmonic) {
    Vec col = sqrt_c_inv * u.col(src);
    double all_max = 0.0;
    for (const auto& br : branches) all_max = std::max(all_max, std::abs(br.w.dot(col)));
    auto largest = [&](BranchKind kind) {
      double best = 0.0;
      for (const auto& br : branches) {
        if (br.kind != kind) continue;
        double v = br.w.dot(col);
        if (std::abs(v) > std::abs(best) * (1.0 + 1e-9)) best = v;
      }
      return std::abs(best) > 1e-9 * all_max ? best : 0.0;
    };
    double ref = largest(BranchKind::Junction);
    if (ref == 0.0) ref = largest(BranchKind::Inductor);
    if (ref == 0.0) {
      Eigen::Index idx = 0;
      col.cwiseAbs().maxCoeff(&idx);
      ref = col(idx);
    }
    double scale = 1.0 / ref;
    if (options.harmonic_rescale) scale *= (*options.harmonic_rescale)(mode);
    const double s = sigma(src);
    part.omega(mode) = s;
    part.impedance(mode) = 1.0 / (scale * scale * s);
    place(src, scale);
  }
  for (auto src : charge) place(src, 1.0);
  part.frozen.assign(static_cast<std::size_t>(part.n_charge), false);
  return out;
}

SecondTransformation second_transformation(const FirstTransformation& first,
                                           const std::vector<InductiveBranch>& branches,
                                           const TransformOptions& options) {
  const auto& part = first.partition;
  const Eigen::Index n = first.S1.cols();
  const Eigen::Index nh = part.n_harmonic;
  const Eigen::Index nc = part.n_charge;
  SecondTransformation out;
  out.S2 = Mat::Identity(n, n);
  out.R2 = Mat::Identity(n, n);
  out.frozen.assign(static_cast<std::size_t>(nc), false);
  if (nc == 0) return out;

  std::vector<int> junctions;
  std::vector<Vec> vectors;
  for (const auto& br : branches) {
    if (br.kind != BranchKind::Junction) continue;
    junctions.push_back(br.index);
    vectors.push_back((first.S1.transpose() * br.w).tail(nc));
  }

  // Greedy independent set in branch order.
  std::vector<int> chosen;  // positions in `junctions`
  Mat basis(nc, 0);         // orthonormal span of chosen vectors
  for (std::size_t j = 0; j < vectors.size() && static_cast<Eigen::Index>(chosen.size()) < nc; ++j) {
    const Vec& v = vectors[j];
    const double norm = v.norm();
    if (norm == 0.0) continue;
    Vec r = v - basis * (basis.transpose() * v);
    if (r.norm() <= options.rank_tolerance * norm) continue;
    chosen.push_back(static_cast<int>(j));
    basis.conservativeResize(nc, basis.cols() + 1);
    basis.col(basis.cols() - 1) = r.normalized();
  }
  const auto np = static_cast<Eigen::Index>(chosen.size());

  Mat k_piv(nc, np);
  for (Eigen::Index i = 0; i < np; ++i) k_piv.col(i) = vectors[static_cast<std::size_t>(chosen[i])];

  // Coordinates of every junction vector in the pivot basis.
  Mat coords(np, static_cast<Eigen::Index>(vectors.size()));
  if (np > 0) {
    Eigen::ColPivHouseholderQR<Mat> qr(k_piv);
    for (std::size_t j = 0; j < vectors.size(); ++j) coords.col(static_cast<Eigen::Index>(j)) = qr.solve(vectors[j]);
  }
  Mat lattice = k_piv;
  if (np > 0 && !near_integer(coords, 1e-7)) {
    int denom = 0;
    for (int d = 2; d <= 1000 && denom == 0; ++d)
      if (near_integer(coords * static_cast<double>(d), 1e-6)) denom = d;
    if (denom == 0) throw NumericalError("junction charge prefactors do not form a lattice");
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> gens =
        (coords * static_cast<double>(denom)).array().round().cast<std::int64_t>();
    auto h = lattice_basis(gens);
    lattice = k_piv * h.cast<double>() / static_cast<double>(denom);
  }

  Mat k_full(nc, nc);
  k_full.leftCols(np) = lattice;
  if (np < nc) {
    // Directions no junction touches: orthonormal complement of the span.
    Eigen::HouseholderQR<Mat> qr(basis);
    Mat qfull = qr.householderQ() * Mat::Identity(nc, nc);
    k_full.rightCols(nc - np) = qfull.rightCols(nc - np);
    for (Eigen::Index i = np; i < nc; ++i) out.frozen[static_cast<std::size_t>(i)] = true;
  }
  for (Eigen::Index i = 0; i < np; ++i) out.pivots.push_back(junctions[static_cast<std::size_t>(chosen[i])]);

  out.S2.bottomRightCorner(nc, nc) = k_full.transpose().inverse();
  out.R2.bottomRightCorner(nc, nc) = k_full;
  (void)nh;
  return out;
}

Mat TransformedCircuit::charge_inverse_capacitance() const {
  const int nc = partition.n_charge;
  return Cinv_tilde.bottomRightCorner(nc, nc);
}

Vec TransformedCircuit::phase_zero_point() const {
  using namespace constants;
  Vec out(partition.n_harmonic);
  for (int m = 0; m < partition.n_harmonic; ++m)
    out(m) = 2.0 * pi / Phi0 * std::sqrt(hbar * partition.impedance(m) / 2.0);
  return out;
}

TransformedCircuit transform_circuit(CircuitMatrices matrices, const TransformOptions& options) {
  if (matrices.branches.empty()) throw InputError("circuit has no dynamics: it contains no inductive elements");
  auto first = first_transformation(matrices.C, matrices.Lstar, matrices.branches, options);
  auto second = second_transformation(first, matrices.branches, options);

  TransformedCircuit tc;
  tc.partition = first.partition;
  tc.partition.frozen = second.frozen;
  tc.pivots = second.pivots;
  tc.S = first.S1 * second.S2;
  tc.R = first.R1 * second.R2;
  const Eigen::Index n = tc.S.rows();
  const Eigen::Index nh = tc.partition.n_harmonic;
  const Eigen::Index nc = tc.partition.n_charge;

  Mat canon = tc.S.transpose() * tc.R - Mat::Identity(n, n);
  if (canon.cwiseAbs().maxCoeff() > 1e-9) throw NumericalError("coordinate transformation is not canonical");

  Mat cinv = matrices.C.ldlt().solve(Mat::Identity(n, n));
  tc.Cinv_tilde = tc.R.transpose() * cinv * tc.R;
  tc.Lstar_tilde = tc.S.transpose() * matrices.Lstar * tc.S;
  tc.Cinv_tilde = 0.5 * (tc.Cinv_tilde + tc.Cinv_tilde.transpose()).eval();
  tc.Lstar_tilde = 0.5 * (tc.Lstar_tilde + tc.Lstar_tilde.transpose()).eval();

  // Block structure: harmonic blocks diagonal, no harmonic/charge coupling,
  // no quadratic potential on charge modes.
  auto check_offblock = [&](Mat& m, const char* what) {
    const double scale = m.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        bool both_charge = i >= nh && j >= nh;
        if (i == j || both_charge) continue;
        if (std::abs(m(i, j)) > 1e-8 * scale)
          throw NumericalError(std::string("transformed ") + what + " matrix lost its block structure");
        m(i, j) = 0.0;
      }
  };
  check_offblock(tc.Cinv_tilde, "capacitance");
  check_offblock(tc.Lstar_tilde, "inductance");
  if (nc > 0) {
    const double lscale = std::max(tc.Lstar_tilde.cwiseAbs().maxCoeff(), 1e-300);
    if (tc.Lstar_tilde.bottomRightCorner(nc, nc).cwiseAbs().maxCoeff() > 1e-8 * lscale)
      throw NumericalError("charge modes carry an inductive potential");
    tc.Lstar_tilde.bottomRightCorner(nc, nc).setZero();
  }

  tc.wtilde = matrices.W * tc.S;
  for (const auto& br : matrices.branches) {
    auto row = tc.wtilde.row(br.index);
    for (Eigen::Index m = nh; m < n; ++m) {
      double v = row(m);
      if (br.kind == BranchKind::Inductor) {
        row(m) = 0.0;
        continue;
      }
      double r = std::round(v);
      if (std::abs(v - r) > 1e-6)
        throw NumericalError("junction charge prefactor is not an integer after the lattice transformation");
      row(m) = r;
    }
  }
  for (Eigen::Index c = 0; c < nc; ++c)
    if (tc.partition.frozen[static_cast<std::size_t>(c)])
      tc.warnings.push_back("charge mode " + std::to_string(nh + c + 1) +
                            " is not coupled to any junction; its truncation is fixed to 1");
  tc.matrices = std::move(matrices);
  return tc;
}

std::vector<JunctionPrefactors> junction_cosine_prefactors(const TransformedCircuit& tc) {
  std::vector<JunctionPrefactors> out;
  const int nh = tc.partition.n_harmonic;
  const int nc = tc.partition.n_charge;
  Vec zp = tc.phase_zero_point();
  for (const auto& br : tc.matrices.branches) {
    if (br.kind != BranchKind::Junction) continue;
    JunctionPrefactors p;
    p.branch = br.index;
    p.phase_zp.resize(nh);
    for (int m = 0; m < nh; ++m) p.phase_zp(m) = tc.wtilde(br.index, m) * zp(m);
    for (int c = 0; c < nc; ++c) p.charge_powers.push_back(static_cast<int>(tc.wtilde(br.index, nh + c)));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cqe
