#pragma once

#include <cmath>

#include "impreg/linalg.hpp"
#include "impreg/rng.hpp"

namespace testutil {

inline double normal(impreg::Rng& rng) {
  // Box-Muller; independent of the library's samplers on purpose.
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline impreg::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols,
                                    impreg::Rng& rng) {
  impreg::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline impreg::Vector random_vector(Eigen::Index n, impreg::Rng& rng) {
  return random_matrix(n, 1, rng).col(0);
}

inline impreg::Matrix random_symmetric(Eigen::Index d, impreg::Rng& rng) {
  const impreg::Matrix a = random_matrix(d, d, rng);
  return (a + a.transpose()) / 2.0;
}

inline impreg::Matrix random_spd(Eigen::Index d, impreg::Rng& rng) {
  const impreg::Matrix a = random_matrix(d, d, rng);
  return a * a.transpose() + impreg::Matrix::Identity(d, d) * 0.5;
}

inline double max_abs(const impreg::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testutil
