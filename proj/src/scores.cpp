#include "enlarge/scores.hpp"

#include <cmath>
#include <limits>

namespace enlarge {

double power_mean_from_log(const Vector& log_density, double gamma) {
  const int n = static_cast<int>(log_density.size());
  double max_term = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (log_density[i] < kLogDensityFloor) continue;
    max_term = std::max(max_term, gamma * log_density[i]);
  }
  if (!std::isfinite(max_term)) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (log_density[i] < kLogDensityFloor) continue;
    acc += std::exp(gamma * log_density[i] - max_term);
  }
  return std::exp(max_term + std::log(acc) - std::log(static_cast<double>(n)));
}

ScoreStats mvn_score_stats(const SampleSet& samples, const MvnParams& params,
                           double gamma) {
  validate_samples(samples);
  if (samples.dim() != params.dim()) {
    throw DataError("sample dimension does not match model");
  }
  auto llt = cholesky_or_throw(params);
  const int n = samples.n();
  const int d = samples.dim();
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
  const double lognorm = -0.5 * (d * 1.8378770664093454836 + logdet);

  ScoreStats st;
  st.log_density.resize(n);
  for (int i = 0; i < n; ++i) {
    Vector z = llt.matrixL().solve(samples.points.row(i).transpose() - params.mean);
    st.log_density[i] = lognorm - 0.5 * z.squaredNorm();
  }
  st.A = power_mean_from_log(st.log_density, gamma);
  st.I = mvn_power_integral(params, gamma);
  return st;
}

double power_score_from_stats(double A, double I, double c, double gamma) {
  return gamma * std::pow(c, 1.0 + gamma) * I - (1.0 + gamma) * std::pow(c, gamma) * A;
}

double sphere_score_from_stats(double A, double I, double gamma) {
  if (!(A > 0.0)) {
    throw DegenerateScoreError("all sample densities underflowed to zero");
  }
  return -A / std::pow(I, gamma / (1.0 + gamma));
}

ScoreValue power_score(const SampleSet& samples, const MvnParams& params,
                       double c, const GammaScoreConfig& cfg) {
  if (!(c > 0.0)) throw ConfigError("scale c must be positive");
  auto st = mvn_score_stats(samples, params, cfg.gamma());
  return {power_score_from_stats(st.A, st.I, c, cfg.gamma()), st.A, st.I};
}

double sphere_score(const SampleSet& samples, const MvnParams& params,
                    const GammaScoreConfig& cfg) {
  auto st = mvn_score_stats(samples, params, cfg.gamma());
  return sphere_score_from_stats(st.A, st.I, cfg.gamma());
}

double holder_score(const SampleSet& samples, const MvnParams& params,
                    double c, const GammaScoreConfig& cfg) {
  if (!(c > 0.0)) throw ConfigError("scale c must be positive");
  auto st = mvn_score_stats(samples, params, cfg.gamma());
  const double z = st.A / (c * st.I);
  return cfg.phi(z) * std::pow(c, 1.0 + cfg.gamma()) * st.I;
}

ProfileC profile_c(const SampleSet& samples, const MvnParams& params,
                   const GammaScoreConfig& cfg) {
  auto st = mvn_score_stats(samples, params, cfg.gamma());
  if (!(st.A > 0.0)) {
    throw DegenerateScoreError("all sample densities underflowed to zero");
  }
  const double c_raw = st.A / st.I;
  return {c_raw, std::min(1.0, c_raw)};
}

}  // namespace enlarge
