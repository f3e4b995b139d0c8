#pragma once

// Lowest eigenpairs of a sparse Hermitian matrix.

#include <cstdint>

#include "cqe/operators.hpp"

namespace cqe {

struct EigenOptions {
  int dense_threshold = 512;     // dimensions up to this use a dense solver
  int block_size = 3;
  int max_basis = 0;             // 0: chosen from the number of requested pairs
  int max_restarts = 2000;
  double tolerance = 1e-12;      // residual relative to ‖H‖₁
  std::uint64_t seed = 0x5eed5eedULL;
};

struct EigenResult {
  Eigen::VectorXd values;     // ascending
  DenseMatrix vectors;        // columns, unit norm
  Eigen::VectorXd residuals;  // ‖H v - λ v‖
  double norm_estimate = 0.0; // ‖H‖₁
  int iterations = 0;
  bool dense = false;
};

/// Makes the largest-magnitude component of every column real and positive.
void fix_phases(DenseMatrix& vectors);

EigenResult dense_lowest(const SparseMatrix& h, int count);

/// Block Lanczos with thick restarts and full reorthogonalization.
EigenResult lanczos_lowest(const SparseMatrix& h, int count, const EigenOptions& options = {});

/// Dispatches on dimension; `count` pairs are returned.
EigenResult lowest_eigenpairs(const SparseMatrix& h, int count, const EigenOptions& options = {});

double one_norm(const SparseMatrix& h);

}  // namespace cqe
