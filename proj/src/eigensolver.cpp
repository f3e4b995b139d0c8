#include "cqe/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cqe/error.hpp"

namespace cqe {

namespace {

using Vec = Eigen::VectorXcd;

// Orthonormalizes the columns of x against the first `used` columns of v
// and among themselves; columns that collapse are dropped.
DenseMatrix orthonormalize(DenseMatrix x, const DenseMatrix& v, Eigen::Index used) {
  for (int pass = 0; pass < 2 && used > 0; ++pass) {
    auto vb = v.leftCols(used);
    x -= vb * (vb.adjoint() * x);
  }
  DenseMatrix out(x.rows(), 0);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Vec c = x.col(j);
    const double start = c.norm();
    if (start == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (used > 0) c -= v.leftCols(used) * (v.leftCols(used).adjoint() * c);
      if (out.cols() > 0) c -= out * (out.adjoint() * c);
    }
    const double norm = c.norm();
    if (norm <= 1e-10 * start) continue;
    out.conservativeResize(Eigen::NoChange, out.cols() + 1);
    out.col(out.cols() - 1) = c / norm;
  }
  return out;
}

DenseMatrix random_block(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      double re = normal(rng);
      double im = normal(rng);
      x(i, j) = Complex(re, im);
    }
  return x;
}

}  // namespace

double one_norm(const SparseMatrix& h) {
  double best = 0.0;
  for (int k = 0; k < h.outerSize(); ++k) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

void fix_phases(DenseMatrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    auto col = vectors.col(j);
    const double biggest = col.cwiseAbs().maxCoeff();
    if (biggest == 0.0) continue;
    Eigen::Index pick = 0;
    for (Eigen::Index i = 0; i < col.size(); ++i)
      if (std::abs(col(i)) >= (1.0 - 1e-9) * biggest) {
        pick = i;
        break;
      }
    const Complex z = col(pick);
    col *= std::conj(z) / std::abs(z);
    col(pick) = std::abs(col(pick));
  }
}

EigenResult dense_lowest(const SparseMatrix& h, int count) {
  const Eigen::Index n = h.rows();
  if (count < 1 || count > n) throw InputError("requested eigenpair count must be between 1 and the dimension");
  DenseMatrix d = DenseMatrix(h);
  d = 0.5 * (d + d.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(d);
  if (es.info() != Eigen::Success) throw NumericalError("dense Hermitian eigensolver failed");
  EigenResult r;
  r.dense = true;
  r.values = es.eigenvalues().head(count);
  r.vectors = es.eigenvectors().leftCols(count);
  fix_phases(r.vectors);
  r.norm_estimate = one_norm(h);
  r.residuals.resize(count);
  for (int i = 0; i < count; ++i) r.residuals(i) = (h * r.vectors.col(i) - r.values(i) * r.vectors.col(i)).norm();
  return r;
}

EigenResult lanczos_lowest(const SparseMatrix& h, int count, const EigenOptions& options) {
  const Eigen::Index n = h.rows();
  if (count < 1 || count >= n) throw InputError("requested eigenpair count must be between 1 and dim - 1");
  const int target = static_cast<int>(std::min<Eigen::Index>(count + 2, n - 1));
  const int bs = std::max(1, std::min(options.block_size, target));
  Eigen::Index m = options.max_basis > 0 ? options.max_basis : std::max<Eigen::Index>(2 * target + 4 * bs, 40);
  m = std::min(m, n);
  const Eigen::Index keep = std::max<Eigen::Index>(target, std::min<Eigen::Index>(target + bs, m - 2 * bs));

  const double hnorm = one_norm(h);
  const double tol = options.tolerance * std::max(hnorm, 1e-300);
  std::mt19937_64 rng(options.seed);

  DenseMatrix v(n, m + bs);
  DenseMatrix w(n, m + bs);
  Eigen::Index used = 0;
  DenseMatrix next = random_block(n, bs, rng);

  EigenResult r;
  r.norm_estimate = hnorm;
  Eigen::VectorXd theta;
  DenseMatrix y;
  for (int iter = 0; iter < options.max_restarts * static_cast<int>(m); ++iter) {
    DenseMatrix x = orthonormalize(next, v, used);
    if (x.cols() == 0 && used < n) x = orthonormalize(random_block(n, bs, rng), v, used);
    const Eigen::Index add = std::min<Eigen::Index>(x.cols(), m + bs - used);
    if (add > 0) {
      v.middleCols(used, add) = x.leftCols(add);
      w.middleCols(used, add) = h * x.leftCols(add);
      used += add;
    }

    DenseMatrix t = v.leftCols(used).adjoint() * w.leftCols(used);
    t = 0.5 * (t + t.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(t);
    theta = es.eigenvalues();
    y = es.eigenvectors();
    const Eigen::Index have = std::min<Eigen::Index>(target, used);

    DenseMatrix u = v.leftCols(used) * y.leftCols(have);
    DenseMatrix hu = w.leftCols(used) * y.leftCols(have);
    Eigen::VectorXd res(have);
    for (Eigen::Index i = 0; i < have; ++i) res(i) = (hu.col(i) - theta(i) * u.col(i)).norm();
    r.iterations = iter + 1;

    const bool exhausted = used >= n;
    if (have >= target && ((res.head(count).array() <= tol).all() || exhausted)) {
      r.values = theta.head(count);
      r.vectors = u.leftCols(count);
      for (int i = 0; i < count; ++i) r.vectors.col(i).normalize();
      fix_phases(r.vectors);
      r.residuals.resize(count);
      for (int i = 0; i < count; ++i)
        r.residuals(i) = (h * r.vectors.col(i) - r.values(i) * r.vectors.col(i)).norm();
      return r;
    }
    if (exhausted) break;

    // Continuation block: H applied to the newest block, made orthogonal to
    // the whole basis. It stays orthogonal to any restarted subspace.
    const Eigen::Index last = std::max<Eigen::Index>(add, 1);
    DenseMatrix wl = w.middleCols(used - last, last);
    next = wl - v.leftCols(used) * (v.leftCols(used).adjoint() * wl);

    if (used + bs > m) {
      DenseMatrix vk = v.leftCols(used) * y.leftCols(keep);
      DenseMatrix wk = w.leftCols(used) * y.leftCols(keep);
      v.leftCols(keep) = vk;
      w.leftCols(keep) = wk;
      used = keep;
    }
    r.residuals = res;
  }
  std::ostringstream msg;
  msg << "Lanczos eigensolver did not converge after " << r.iterations << " steps; residuals/‖H‖:";
  for (Eigen::Index i = 0; i < r.residuals.size(); ++i) msg << " " << r.residuals(i) / std::max(hnorm, 1e-300);
  throw NumericalError(msg.str());
}

EigenResult lowest_eigenpairs(const SparseMatrix& h, int count, const EigenOptions& options) {
  if (h.rows() != h.cols()) throw InputError("Hamiltonian must be square");
  if (count < 1 || count >= h.rows())
    throw InputError("n_eig must satisfy 1 <= n_eig < dimension (" + std::to_string(h.rows()) + ")");
  if (h.rows() <= options.dense_threshold) return dense_lowest(h, count);
  return lanczos_lowest(h, count, options);
}

}  // namespace cqe
