#pragma once

#include <cstdint>
#include <vector>

#include "enlarge/scores.hpp"

namespace enlarge {

struct FitOptions {
  int max_iter = 500;
  double tol = 1e-8;
  int n_starts = 5;
  std::uint64_t seed = 0;
};

enum class Branch {
  Interior,  // c_hat = c(theta_tilde) < 1, sphere-fit solution
  Boundary,  // c_hat = 1, density-power fallback
};

struct FitDiagnostics {
  int iterations = 0;
  bool converged = false;
  double final_score = 0.0;
};

/// Fitted enlarged model (c_hat, theta_hat) with convergence diagnostics.
struct EnlargedMvnFit {
  double c_hat = 1.0;
  MvnParams theta;
  Branch branch = Branch::Boundary;
  int iterations = 0;
  bool converged = false;
  double final_score = 0.0;  // power score at (c_hat, theta)
};

/// Pseudo-spherical fit of the normal model by the gamma-weighted fixed
/// point: w_i ~ p_theta(x_i)^gamma, mu <- sum w_i x_i,
/// Sigma <- (1+gamma) sum w_i (x_i - mu)(x_i - mu)^T.
std::pair<MvnParams, FitDiagnostics> fit_sphere_mvn(const SampleSet& samples,
                                                    const GammaScoreConfig& cfg,
                                                    const FitOptions& opts);

/// Density-power fit at c = 1; fixed point with the normalization term's
/// gradient folded into the covariance update, backtracking on increase.
std::pair<MvnParams, FitDiagnostics> fit_power_mvn(const SampleSet& samples,
                                                   const GammaScoreConfig& cfg,
                                                   const FitOptions& opts);

/// Two-stage fit of the enlarged model: sphere fit (best of n_starts),
/// profile c; density-power fallback when the profile exceeds 1.
EnlargedMvnFit fit_enlarged(const SampleSet& samples, const GammaScoreConfig& cfg,
                            const FitOptions& opts);

/// Indices of the round(n (1 - c_hat)) samples with smallest fitted density,
/// ties broken by lower index.  Empty when c_hat = 1.
std::vector<int> detect_outliers(const SampleSet& samples, const EnlargedMvnFit& fit,
                                 double gamma);

/// Shared helper: outlier count and index selection from log densities.
std::vector<int> smallest_density_indices(const Vector& log_density, double c_hat);

/// Robust default start: coordinate-wise median and squared-MAD diagonal.
MvnParams robust_mvn_start(const SampleSet& samples);

}  // namespace enlarge
