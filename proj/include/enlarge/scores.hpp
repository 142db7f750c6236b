#pragma once

#include <utility>

#include "enlarge/mvn.hpp"
#include "enlarge/score_config.hpp"

namespace enlarge {

/// Score together with the two sufficient statistics it is built from:
/// A = (1/n) sum_i p_theta(x_i)^gamma and I = <p_theta^{1+gamma}>.
struct ScoreValue {
  double value = 0.0;
  double A = 0.0;
  double I = 0.0;
};

/// Per-sample log densities plus the (A, I) pair.  A is accumulated in
/// log space (log-sum-exp); samples below the density floor contribute 0.
struct ScoreStats {
  Vector log_density;  // length n
  double A = 0.0;
  double I = 0.0;
};

ScoreStats mvn_score_stats(const SampleSet& samples, const MvnParams& params,
                           double gamma);

/// A from a vector of log densities, in log space.
double power_mean_from_log(const Vector& log_density, double gamma);

/// Density-power score of the enlarged model c * p_theta:
/// gamma c^{1+gamma} I - (1+gamma) c^gamma A.
ScoreValue power_score(const SampleSet& samples, const MvnParams& params,
                       double c, const GammaScoreConfig& cfg);

/// Pseudo-spherical score -A / I^{gamma/(1+gamma)}; strictly negative.
/// Throws DegenerateScoreError when A underflows to 0.
double sphere_score(const SampleSet& samples, const MvnParams& params,
                    const GammaScoreConfig& cfg);

/// Generic Hoelder score phi(A / (c I)) c^{1+gamma} I.
double holder_score(const SampleSet& samples, const MvnParams& params,
                    double c, const GammaScoreConfig& cfg);

/// Profile scale c(theta) = A / I, and its clip to (0, 1].
struct ProfileC {
  double c_raw;
  double c_clipped;
};
ProfileC profile_c(const SampleSet& samples, const MvnParams& params,
                   const GammaScoreConfig& cfg);

// Variants on precomputed statistics, shared with the fitters.
double power_score_from_stats(double A, double I, double c, double gamma);
double sphere_score_from_stats(double A, double I, double gamma);

}  // namespace enlarge
