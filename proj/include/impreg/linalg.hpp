#pragma once

#include <Eigen/Dense>

namespace impreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Eigenpairs of a real symmetric matrix, eigenvalues sorted in decreasing
/// order with matching eigenvector columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi eigendecomposition. Rotations sweep the upper triangle in
/// row-major order until the largest off-diagonal magnitude drops below
/// `rel_tol * ||A||_F`. The input must be symmetric within `sym_tol`.
SymmetricEigen jacobi_eigen(const Matrix& a, double rel_tol = 1e-12,
                            double sym_tol = 1e-10);

/// Principal square root of a symmetric positive definite matrix.
Matrix spd_sqrt(const Matrix& a);

/// Largest absolute entry of A - A^T.
double asymmetry(const Matrix& a);

/// Rebuilds V diag(values) V^T.
Matrix reconstruct(const Vector& values, const Matrix& vectors);

/// Spectral (operator) norm via singular values.
double operator_norm(const Matrix& a);

}  // namespace impreg
