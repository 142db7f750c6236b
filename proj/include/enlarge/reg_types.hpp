#pragma once

#include <Eigen/Dense>

#include "enlarge/errors.hpp"
#include "enlarge/mvn.hpp"

namespace enlarge {

/// Regression training data: features X (n x d) and responses y (n).
struct RegData {
  Matrix x;
  Vector y;

  int n() const { return static_cast<int>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }
};

/// Linear location-scale model y = intercept + beta^T x + sigma * eps.
struct RegParams {
  Vector beta;
  double intercept = 0.0;
  double sigma = 1.0;
};

void validate_reg_data(const RegData& data);

inline Vector predict(const RegParams& params, const Matrix& x) {
  return (x * params.beta).array() + params.intercept;
}

inline Vector residuals(const RegParams& params, const RegData& data) {
  return data.y - predict(params, data.x);
}

/// Design matrix [X | 1].
Matrix with_intercept(const Matrix& x);

/// Weighted least squares on the design matrix; returns (beta..., intercept).
/// Throws DesignSingularError when the weighted design is rank deficient.
Vector solve_wls(const Matrix& design, const Vector& y, const Vector& w);

}  // namespace enlarge
