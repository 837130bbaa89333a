#pragma once

#include <Eigen/Dense>

namespace graphcal {

struct JacobiOptions {
  double tolerance = 1e-10;  // off-diagonal Frobenius norm
  int max_sweeps = 100;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Throws NumericError if the sweep limit is hit before convergence.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& matrix, const JacobiOptions& options = {});

/// I - D^{-1/2} W D^{-1/2}, D = diag(row sums of W).
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& weights);

}  // namespace graphcal
