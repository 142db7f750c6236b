#pragma once

#include <utility>
#include <vector>

#include "enlarge/enlarged_density.hpp"
#include "enlarge/reg_types.hpp"

namespace enlarge {

/// Sufficient statistics of the conditional scores:
/// A = (1/n) sum_i p_theta(y_i|x_i)^gamma and
/// I = sigma^{-gamma} (2pi)^{-gamma/2} (1+gamma)^{-1/2}.  I is independent
/// of x for location-scale models.
struct CondScoreStats {
  Vector log_density;  // length n, log p_theta(y_i|x_i)
  double A = 0.0;
  double I = 0.0;
};

/// <s^{1+gamma}> for the standard normal base density s.
double normal_s_power_integral(double gamma);

/// Conditional score statistics.  s_integral is the base-density constant
/// <s^{1+gamma}>; the default uses the standard normal.
CondScoreStats cond_score_stats(const RegData& data, const RegParams& params,
                                double gamma, double s_integral = -1.0);

/// Conditional density-power score of c * p_theta(y|x):
/// -(1+gamma) c^gamma A + gamma c^{1+gamma} I.
double cond_power_score(const RegData& data, const RegParams& params, double c,
                        double gamma);

/// Conditional pseudo-spherical score -A / I^{gamma/(1+gamma)}.
double cond_sphere_score(const RegData& data, const RegParams& params,
                         double gamma);

/// Profile scale c_reg(theta) = A / I and its clip to (0, 1].
ProfileC c_reg(const RegData& data, const RegParams& params, double gamma);

/// Fitted enlarged location-scale model.
struct EnlargedRegFit {
  double c_hat = 1.0;
  RegParams theta;
  Branch branch = Branch::Boundary;
  int iterations = 0;
  bool converged = false;
  double final_score = 0.0;  // conditional power score at (c_hat, theta)
};

/// IRLS on the conditional pseudo-spherical score:
/// w_i ~ exp(-gamma r_i^2 / (2 sigma^2)), weighted LS for (beta, intercept),
/// sigma^2 <- (1+gamma) sum w_i r_i^2 / sum w_i.
std::pair<RegParams, FitDiagnostics> fit_sphere_reg(const RegData& data,
                                                    double gamma,
                                                    const FitOptions& opts);

/// IRLS on the conditional density-power score at c = 1, with the
/// normalization term folded into the sigma update and backtracking on
/// score increase.
std::pair<RegParams, FitDiagnostics> fit_power_reg(const RegData& data,
                                                   double gamma,
                                                   const FitOptions& opts);

/// Two-stage enlarged fit: sphere fit, profile c_reg, density-power
/// fallback when the profile exceeds 1.  Under heterogeneous contamination
/// 1 - c_hat estimates the expected contamination ratio.
EnlargedRegFit fit_enlarged_reg(const RegData& data, double gamma,
                                const FitOptions& opts);

/// Indices of the round(n (1 - c_hat)) samples with smallest fitted
/// conditional density; ties by lower index.  Empty when c_hat = 1.
std::vector<int> detect_outliers_reg(const RegData& data,
                                     const EnlargedRegFit& fit, double gamma);

/// Scale floor used by the regression fitters: 1e-8 * (MAD of y + 1e-12).
double sigma_floor(const RegData& data);

}  // namespace enlarge
