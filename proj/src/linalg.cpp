#include "impreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "impreg/error.hpp"

namespace impreg {

double asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  if (a.size() == 0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

SymmetricEigen jacobi_eigen(const Matrix& input, double rel_tol,
                            double sym_tol) {
  require(input.rows() == input.cols(), ErrorCode::DimensionMismatch,
          "jacobi_eigen: matrix is not square");
  require(input.allFinite(), ErrorCode::InvalidArgument,
          "jacobi_eigen: non-finite entry");
  require(asymmetry(input) <= sym_tol, ErrorCode::NotSymmetric,
          "jacobi_eigen: matrix is not symmetric");

  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double threshold = rel_tol * a.norm();
  constexpr int kMaxSweeps = 100;

  auto max_off = [&] {
    double m = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  for (int sweep = 0; sweep < kMaxSweeps && max_off() > threshold; ++sweep) {
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= threshold) continue;
        // Symmetric Schur rotation zeroing a(p, q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
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
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

Matrix reconstruct(const Vector& values, const Matrix& vectors) {
  Matrix out = vectors * values.asDiagonal() * vectors.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix spd_sqrt(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorCode::DimensionMismatch,
          "spd_sqrt: matrix is not square");
  require(asymmetry(a) <= 1e-10, ErrorCode::NotSymmetric,
          "spd_sqrt: matrix is not symmetric");
  const SymmetricEigen eig = jacobi_eigen(a);
  if (eig.values.size() > 0 && eig.values.minCoeff() <= 0.0)
    fail(ErrorCode::NotPositiveDefinite, "spd_sqrt: non-positive eigenvalue");
  return reconstruct(eig.values.cwiseSqrt(), eig.vectors);
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace impreg
