#pragma once

#include <optional>

#include "impreg/linalg.hpp"
#include "impreg/score.hpp"
#include "impreg/simgen.hpp"

namespace impreg {

enum class MomentMode {
  PlainVector,
  TruncatedVector,
  PlainMatrixSymmetrized,
  ShrunkMatrixSymmetrized,
};

const char* to_string(MomentMode mode) noexcept;

/// Target the solvers descend toward: (1/n) sum y_i S(x_i), or one of its
/// robust variants. Vector modes store a p x 1 column.
struct MomentEstimate {
  Matrix value;
  MomentMode mode = MomentMode::PlainVector;
  std::optional<double> tau;
  std::optional<double> kappa;

  bool is_vector() const {
    return mode == MomentMode::PlainVector || mode == MomentMode::TruncatedVector;
  }
  Vector vector() const { return value.col(0); }
};

struct ShrinkageConfig {
  double kappa;
};

/// Sign-preserving clip: sign(a) * min(|a|, tau).
double winsorize(double a, double tau);

/// Catoni-type influence function: log(1 + x + x^2/2) for x > 0 and
/// -log(1 - x + x^2/2) for x <= 0. Odd, increasing, |psi(x)| <= |x|.
double psi(double x);

/// Applies sigma -> psi(kappa * sigma) / kappa to the singular values of A.
/// Equals the top-right block of psi applied to the Hermitian dilation of
/// kappa * A, divided by kappa.
Matrix spectral_shrink(const Matrix& a, double kappa);

MomentEstimate plain_moment(const SimInstance& inst, const ScoreModel& model);
MomentEstimate plain_moment(const MatrixSimInstance& inst, const ScoreModel& model);

/// value_j = (1/n) sum_i winsorize(y_i, tau) * winsorize(S(x_i)_j, tau).
MomentEstimate truncated_moment_vector(const SimInstance& inst,
                                       const ScoreModel& model, double tau);

/// (1/2n) sum_i [H(y_i S(X_i), kappa) + H(y_i S(X_i), kappa)^T] with
/// H(A, kappa) = spectral_shrink(A, kappa).
MomentEstimate robust_moment_matrix(const MatrixSimInstance& inst,
                                    const ScoreModel& model, double kappa);

/// tau = (M n / log p)^{1/4} / 2.
double truncation_level(double fourth_moment, double n, double p);
/// Level used in the simulation study: tau = 2 (n / log p)^{1/4}.
double simulation_truncation_level(double n, double p);
/// kappa = sqrt(log(4d) / (n d M)).
double shrinkage_level(double fourth_moment, double n, double d);
/// Level used in the simulation study: kappa = 2 sqrt(log(4d) / (n d)).
double simulation_shrinkage_level(double n, double d);

/// Empirical fourth moment of the responses, the default M.
double empirical_fourth_moment(const Vector& responses);

}  // namespace impreg
