#pragma once

// Single-mode operators on truncated Fock and charge spaces, and their
// Kronecker embedding into the product space (mode 0 is the slowest index).

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cqe {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using OperatorRep = SparseMatrix;

SparseMatrix identity_op(int levels);
SparseMatrix annihilation_op(int levels);
SparseMatrix creation_op(int levels);
SparseMatrix number_op(int levels);

/// Cooper-pair number of basis state k in a window of `levels` states
/// centred on zero: k - (levels - 1) / 2. `levels` must be odd.
int charge_number(int k, int levels);

/// Diagonal charge operator 2e (n + n_g) in coulomb.
SparseMatrix charge_op(int levels, double offset);

/// |n> -> |n + 1>; the top state is annihilated by the truncation.
SparseMatrix charge_raise_op(int levels);

/// <m| exp(alpha a† - alpha* a) |n> for m, n < levels, from the closed-form
/// Laguerre expression (exact matrix elements of the untruncated operator).
DenseMatrix displacement_matrix(int levels, Complex alpha);
SparseMatrix displacement_op(int levels, Complex alpha);

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

/// factors[0] ⊗ factors[1] ⊗ ...
SparseMatrix kron_chain(std::span<const SparseMatrix> factors);

/// I ⊗ ... ⊗ op ⊗ ... ⊗ I with `op` at position `mode`.
SparseMatrix lift(const SparseMatrix& op, int mode, std::span<const int> dims);

/// Largest |H_ij - conj(H_ji)|.
double hermiticity_error(const SparseMatrix& m);

}  // namespace cqe
