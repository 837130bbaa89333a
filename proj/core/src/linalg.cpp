#include "graphcal/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "graphcal/errors.hpp"

namespace graphcal {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

}  // namespace

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& matrix, const JacobiOptions& options) {
  if (matrix.rows() != matrix.cols()) throw DomainError("eigenvalues: matrix must be square");
  Eigen::MatrixXd a = matrix;
  const Eigen::Index n = a.rows();

  int sweep = 0;
  while (off_diagonal_norm(a) > options.tolerance) {
    if (++sweep > options.max_sweeps) throw NumericError("Jacobi eigen-solver did not converge");
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p, q) (Golub & Van Loan, sym.schur2).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  Eigen::VectorXd values = a.diagonal();
  std::sort(values.data(), values.data() + values.size());
  return values;
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols()) throw DomainError("laplacian: matrix must be square");
  const Eigen::VectorXd degree = weights.rowwise().sum();
  Eigen::VectorXd inv_sqrt(degree.size());
  for (Eigen::Index i = 0; i < degree.size(); ++i) {
    if (!(degree(i) > 0.0)) throw NumericError("laplacian: node with non-positive degree");
    inv_sqrt(i) = 1.0 / std::sqrt(degree(i));
  }
  Eigen::MatrixXd l = -(inv_sqrt.asDiagonal() * weights * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    for (Eigen::Index j = i + 1; j < l.cols(); ++j) l(j, i) = l(i, j);
  return l;
}

}  // namespace graphcal
