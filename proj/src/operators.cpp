#include "cqe/operators.hpp"

#include <cmath>

#include "cqe/constants.hpp"
#include "cqe/error.hpp"

namespace cqe {

namespace {

void require_levels(int levels) {
  if (levels < 1) throw InputError("truncation must be at least 1");
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<Eigen::Triplet<Complex>>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

SparseMatrix identity_op(int levels) {
  require_levels(levels);
  SparseMatrix m(levels, levels);
  m.setIdentity();
  return m;
}

SparseMatrix annihilation_op(int levels) {
  require_levels(levels);
  std::vector<Eigen::Triplet<Complex>> t;
  for (int n = 1; n < levels; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  return from_triplets(levels, levels, t);
}

SparseMatrix creation_op(int levels) { return SparseMatrix(annihilation_op(levels).adjoint()); }

SparseMatrix number_op(int levels) {
  require_levels(levels);
  std::vector<Eigen::Triplet<Complex>> t;
  for (int n = 1; n < levels; ++n) t.emplace_back(n, n, static_cast<double>(n));
  return from_triplets(levels, levels, t);
}

int charge_number(int k, int levels) {
  if (levels % 2 == 0) throw InputError("charge truncation must be odd");
  return k - (levels - 1) / 2;
}

SparseMatrix charge_op(int levels, double offset) {
  require_levels(levels);
  std::vector<Eigen::Triplet<Complex>> t;
  for (int k = 0; k < levels; ++k)
    t.emplace_back(k, k, 2.0 * constants::e * (charge_number(k, levels) + offset));
  return from_triplets(levels, levels, t);
}

SparseMatrix charge_raise_op(int levels) {
  require_levels(levels);
  std::vector<Eigen::Triplet<Complex>> t;
  for (int k = 0; k + 1 < levels; ++k) t.emplace_back(k + 1, k, 1.0);
  return from_triplets(levels, levels, t);
}

DenseMatrix displacement_matrix(int levels, Complex alpha) {
  require_levels(levels);
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) throw InputError("displacement must be finite");
  const double mag = std::abs(alpha);
  if (mag == 0.0) return DenseMatrix::Identity(levels, levels);
  const double x = mag * mag;
  const double log_mag = std::log(mag);
  const Complex unit = alpha / mag;
  DenseMatrix d(levels, levels);
  std::vector<double> lag(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    // Generalized Laguerre L_j^(k)(x), j = 0 .. levels-1-k.
    const int jmax = levels - 1 - k;
    lag[0] = 1.0;
    if (jmax >= 1) lag[1] = 1.0 + k - x;
    for (int j = 1; j < jmax; ++j)
      lag[static_cast<std::size_t>(j) + 1] = ((2.0 * j + 1.0 + k - x) * lag[static_cast<std::size_t>(j)] -
                                               (j + k) * lag[static_cast<std::size_t>(j) - 1]) /
                                              (j + 1.0);
    const Complex phase_lower = std::pow(unit, k);             // alpha^k / |alpha|^k
    const Complex phase_upper = std::pow(-std::conj(unit), k);  // (-alpha*)^k / |alpha|^k
    for (int j = 0; j <= jmax; ++j) {
      const int lo = j;
      const int hi = j + k;
      const double log_amp =
          0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0)) + k * log_mag - 0.5 * x;
      const double amp = std::exp(log_amp) * lag[static_cast<std::size_t>(j)];
      d(hi, lo) = amp * phase_lower;
      if (k > 0) d(lo, hi) = amp * phase_upper;
    }
  }
  return d;
}

SparseMatrix displacement_op(int levels, Complex alpha) {
  DenseMatrix d = displacement_matrix(levels, alpha);
  const double cutoff = 1e-16 * d.cwiseAbs().maxCoeff();
  std::vector<Eigen::Triplet<Complex>> t;
  for (int j = 0; j < levels; ++j)
    for (int i = 0; i < levels; ++i)
      if (std::abs(d(i, j)) > cutoff) t.emplace_back(i, j, d(i, j));
  return from_triplets(levels, levels, t);
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  const auto rows = a.rows() * b.rows();
  const auto cols = a.cols() * b.cols();
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                         static_cast<int>(ia.col() * b.cols() + ib.col()), ia.value() * ib.value());
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix kron_chain(std::span<const SparseMatrix> factors) {
  if (factors.empty()) return identity_op(1);
  SparseMatrix out = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

SparseMatrix lift(const SparseMatrix& op, int mode, std::span<const int> dims) {
  if (mode < 0 || mode >= static_cast<int>(dims.size())) throw InputError("mode index out of range");
  if (op.rows() != dims[static_cast<std::size_t>(mode)] || op.cols() != op.rows())
    throw InputError("operator dimension does not match the truncation of mode " + std::to_string(mode + 1));
  long before = 1;
  long after = 1;
  for (int m = 0; m < mode; ++m) before *= dims[static_cast<std::size_t>(m)];
  for (std::size_t m = static_cast<std::size_t>(mode) + 1; m < dims.size(); ++m) after *= dims[m];
  SparseMatrix out = op;
  if (before > 1) out = kron(identity_op(static_cast<int>(before)), out);
  if (after > 1) out = kron(out, identity_op(static_cast<int>(after)));
  return out;
}

double hermiticity_error(const SparseMatrix& m) {
  SparseMatrix diff = m - SparseMatrix(m.adjoint());
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

}  // namespace cqe
