#include "enlarge/mvn.hpp"

#include <cmath>

namespace enlarge {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

void validate_samples(const SampleSet& samples) {
  if (samples.n() < 1) throw DataError("sample set is empty");
  if (!samples.points.allFinite()) {
    throw DataError("sample set contains NaN or Inf entries");
  }
}

Matrix ensure_spd(const Matrix& cov) {
  const int d = static_cast<int>(cov.rows());
  Matrix sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const double floor = 1e-10 * std::max(sym.trace(), 0.0) / d;
  Vector ev = es.eigenvalues().cwiseMax(floor > 0.0 ? floor : 1e-30);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::LLT<Matrix> cholesky_or_throw(const MvnParams& params) {
  const int d = params.dim();
  if (params.cov.rows() != d || params.cov.cols() != d) {
    throw DataError("covariance dimension does not match mean");
  }
  Eigen::LLT<Matrix> llt(0.5 * (params.cov + params.cov.transpose()));
  if (llt.info() != Eigen::Success) {
    throw ModelSingularError("covariance is not positive definite");
  }
  // Guard against near-singular factors that passed LLT.
  const double tr = params.cov.trace();
  for (int i = 0; i < d; ++i) {
    const double l = llt.matrixLLT()(i, i);
    if (!(l * l > 1e-14 * tr / d)) {
      throw ModelSingularError("covariance is numerically singular");
    }
  }
  return llt;
}

double mvn_log_density(const MvnParams& params, const Vector& x) {
  if (x.size() != params.mean.size()) {
    throw DataError("point dimension does not match model");
  }
  auto llt = cholesky_or_throw(params);
  const int d = params.dim();
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
  Vector z = llt.matrixL().solve(x - params.mean);
  return -0.5 * (d * kLog2Pi + logdet + z.squaredNorm());
}

double mvn_density(const MvnParams& params, const Vector& x) {
  const double lp = mvn_log_density(params, x);
  return lp < kLogDensityFloor ? 0.0 : std::exp(lp);
}

double mvn_power_integral(const MvnParams& params, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  auto llt = cholesky_or_throw(params);
  const int d = params.dim();
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
  const double log_i = -0.5 * gamma * d * kLog2Pi -
                       0.5 * d * std::log1p(gamma) - 0.5 * gamma * logdet;
  return std::exp(log_i);
}

}  // namespace enlarge
