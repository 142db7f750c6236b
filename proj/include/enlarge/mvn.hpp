#pragma once

#include <Eigen/Dense>

#include "enlarge/errors.hpp"

namespace enlarge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Model densities below this value are treated as exactly zero.
inline constexpr double kDensityFloor = 1e-300;
inline const double kLogDensityFloor = -690.775527898213705;  // log(1e-300)

/// Mean and covariance of a d-dimensional normal model.
struct MvnParams {
  Vector mean;
  Matrix cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Empirical sample, one row per observation.
struct SampleSet {
  Matrix points;  // n x d

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// Throws DataError on empty input or non-finite entries.
void validate_samples(const SampleSet& samples);

/// Symmetrizes cov and floors its eigenvalues at 1e-10 * trace / d.
Matrix ensure_spd(const Matrix& cov);

/// Cholesky factor of cov; throws ModelSingularError when cov is not
/// numerically positive definite.
Eigen::LLT<Matrix> cholesky_or_throw(const MvnParams& params);

double mvn_log_density(const MvnParams& params, const Vector& x);
double mvn_density(const MvnParams& params, const Vector& x);

/// Closed form <p_theta^{1+gamma}> = (2pi)^{-gamma d/2} (1+gamma)^{-d/2} |Sigma|^{-gamma/2}.
double mvn_power_integral(const MvnParams& params, double gamma);

}  // namespace enlarge
