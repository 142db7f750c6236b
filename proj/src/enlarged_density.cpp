#include "enlarge/enlarged_density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "enlarge/rng.hpp"
#include "enlarge/stats_util.hpp"

namespace enlarge {

namespace {

/// Normalized gamma-weights from log densities; entries below the density
/// floor get weight zero.  Returns false when every weight vanishes.
bool gamma_weights(const Vector& log_density, double gamma, Vector* w) {
  const int n = static_cast<int>(log_density.size());
  w->resize(n);
  double max_lp = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (log_density[i] >= kLogDensityFloor) max_lp = std::max(max_lp, log_density[i]);
  }
  if (!std::isfinite(max_lp)) return false;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double wi = log_density[i] < kLogDensityFloor
                    ? 0.0
                    : std::exp(gamma * (log_density[i] - max_lp));
    (*w)[i] = wi;
    sum += wi;
  }
  if (!(sum > 0.0)) return false;
  *w /= sum;
  return true;
}

double param_change(const MvnParams& a, const MvnParams& b) {
  double d = (a.mean - b.mean).cwiseAbs().maxCoeff();
  d = std::max(d, (a.cov - b.cov).cwiseAbs().maxCoeff());
  return d;
}

MvnParams lerp(const MvnParams& a, const MvnParams& b, double t) {
  MvnParams out;
  out.mean = a.mean + t * (b.mean - a.mean);
  out.cov = ensure_spd(a.cov + t * (b.cov - a.cov));
  return out;
}

MvnParams perturb_start(const MvnParams& base, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-0.4, 0.4);
  const int d = base.dim();
  MvnParams out = base;
  Vector scale = base.cov.diagonal().cwiseSqrt();
  for (int j = 0; j < d; ++j) out.mean[j] += 0.5 * scale[j] * gauss(rng);
  Vector s(d);
  for (int j = 0; j < d; ++j) s[j] = std::exp(0.5 * unif(rng));
  out.cov = s.asDiagonal() * base.cov * s.asDiagonal();
  return out;
}

enum class Driver { Sphere, Power };

double driving_score(const ScoreStats& st, double gamma, Driver driver) {
  if (driver == Driver::Sphere) return sphere_score_from_stats(st.A, st.I, gamma);
  return power_score_from_stats(st.A, st.I, 1.0, gamma);
}

/// Fixed-point iteration from one start.  The driving score is kept
/// non-increasing: a sphere step that increases it is rejected and the
/// iteration stops; a power step backtracks by halving toward the previous
/// parameters.
std::pair<MvnParams, FitDiagnostics> fit_from_start(const SampleSet& samples,
                                                    double gamma, Driver driver,
                                                    MvnParams cur,
                                                    const FitOptions& opts) {
  const int n = samples.n();
  ScoreStats st = mvn_score_stats(samples, cur, gamma);
  double score = driving_score(st, gamma, driver);

  FitDiagnostics diag;
  for (int it = 0; it < opts.max_iter; ++it) {
    diag.iterations = it + 1;
    Vector w;
    if (!gamma_weights(st.log_density, gamma, &w)) {
      throw DegenerateScoreError("all sample densities underflowed to zero");
    }
    MvnParams prop;
    prop.mean = samples.points.transpose() * w;
    Matrix sw = Matrix::Zero(cur.dim(), cur.dim());
    for (int i = 0; i < n; ++i) {
      Vector d = samples.points.row(i).transpose() - prop.mean;
      sw.noalias() += w[i] * d * d.transpose();
    }
    if (driver == Driver::Sphere) {
      prop.cov = ensure_spd((1.0 + gamma) * sw);
    } else {
      // Stationarity of the power score at c = 1 gives
      // Sigma = (1+gamma) A S_w / ((1+gamma) A - gamma I).
      const double denom = (1.0 + gamma) * st.A - gamma * st.I;
      const double factor = denom > 0.0 ? (1.0 + gamma) * st.A / denom : 1.0 + gamma;
      prop.cov = ensure_spd(factor * sw);
    }

    const double slack = 1e-12 * (1.0 + std::abs(score));
    MvnParams cand = prop;
    ScoreStats st_cand = mvn_score_stats(samples, cand, gamma);
    double score_cand = driving_score(st_cand, gamma, driver);
    if (score_cand > score + slack) {
      if (driver == Driver::Sphere) {
        diag.converged = param_change(cur, prop) < opts.tol;
        break;
      }
      double t = 0.5;
      bool accepted = false;
      while (t > 1e-6) {
        cand = lerp(cur, prop, t);
        st_cand = mvn_score_stats(samples, cand, gamma);
        score_cand = driving_score(st_cand, gamma, driver);
        if (score_cand <= score + slack) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        diag.converged = param_change(cur, prop) < opts.tol;
        break;
      }
    }
    const double change = param_change(cur, cand);
    cur = cand;
    st = st_cand;
    score = score_cand;
    if (change < opts.tol) {
      diag.converged = true;
      break;
    }
  }
  diag.final_score = score;
  return {cur, diag};
}

std::pair<MvnParams, FitDiagnostics> fit_multistart(const SampleSet& samples,
                                                    const GammaScoreConfig& cfg,
                                                    Driver driver,
                                                    const FitOptions& opts) {
  validate_samples(samples);
  if (samples.n() <= samples.dim()) {
    throw DataError("need n > d samples for a nondegenerate covariance");
  }
  if (opts.max_iter < 1 || !(opts.tol > 0.0) || opts.n_starts < 1) {
    throw ConfigError("invalid fit options");
  }
  const MvnParams base = robust_mvn_start(samples);
  std::pair<MvnParams, FitDiagnostics> best;
  bool have = false;
  for (int s = 0; s < opts.n_starts; ++s) {
    MvnParams init = base;
    if (s > 0) {
      Rng rng(split_seed(opts.seed, static_cast<std::uint64_t>(s),
                         driver == Driver::Sphere ? 1 : 2));
      init = perturb_start(base, rng);
    }
    try {
      auto fit = fit_from_start(samples, cfg.gamma(), driver, init, opts);
      if (!have || fit.second.final_score < best.second.final_score) {
        best = fit;
        have = true;
      }
    } catch (const DegenerateScoreError&) {
      // A bad start can land every sample below the density floor; other
      // starts may still succeed.
    }
  }
  if (!have) {
    throw DegenerateScoreError("every start degenerated");
  }
  return best;
}

}  // namespace

MvnParams robust_mvn_start(const SampleSet& samples) {
  const int n = samples.n();
  const int d = samples.dim();
  MvnParams out;
  out.mean.resize(d);
  Vector mad2(d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> col(samples.points.col(j).data(),
                            samples.points.col(j).data() + n);
    const double med = median_of(col);
    out.mean[j] = med;
    std::vector<double> dev(n);
    for (int i = 0; i < n; ++i) dev[i] = std::abs(col[i] - med);
    double mad = 1.4826 * median_of(dev);
    if (!(mad > 0.0)) {
      // Degenerate column; fall back to the standard deviation.
      double var = (samples.points.col(j).array() - samples.points.col(j).mean())
                       .square()
                       .sum() /
                   std::max(n - 1, 1);
      mad = std::sqrt(var);
    }
    mad2[j] = mad * mad;
  }
  out.cov = mad2.asDiagonal();
  return out;
}

std::pair<MvnParams, FitDiagnostics> fit_sphere_mvn(const SampleSet& samples,
                                                    const GammaScoreConfig& cfg,
                                                    const FitOptions& opts) {
  return fit_multistart(samples, cfg, Driver::Sphere, opts);
}

std::pair<MvnParams, FitDiagnostics> fit_power_mvn(const SampleSet& samples,
                                                   const GammaScoreConfig& cfg,
                                                   const FitOptions& opts) {
  return fit_multistart(samples, cfg, Driver::Power, opts);
}

EnlargedMvnFit fit_enlarged(const SampleSet& samples, const GammaScoreConfig& cfg,
                            const FitOptions& opts) {
  auto [theta_sphere, diag_sphere] = fit_sphere_mvn(samples, cfg, opts);
  auto prof = profile_c(samples, theta_sphere, cfg);

  EnlargedMvnFit fit;
  if (prof.c_raw <= 1.0) {
    fit.c_hat = prof.c_raw;
    fit.theta = theta_sphere;
    fit.branch = Branch::Interior;
    fit.iterations = diag_sphere.iterations;
    fit.converged = diag_sphere.converged;
    fit.final_score = power_score(samples, fit.theta, fit.c_hat, cfg).value;
    return fit;
  }

  auto [theta_power, diag_power] = fit_power_mvn(samples, cfg, opts);
  const double score_power = power_score(samples, theta_power, 1.0, cfg).value;
  const double score_clip = power_score(samples, theta_sphere, 1.0, cfg).value;
  fit.c_hat = 1.0;
  fit.branch = Branch::Boundary;
  if (score_power <= score_clip) {
    fit.theta = theta_power;
    fit.iterations = diag_power.iterations;
    fit.converged = diag_power.converged;
    fit.final_score = score_power;
  } else {
    fit.theta = theta_sphere;
    fit.iterations = diag_sphere.iterations;
    fit.converged = diag_sphere.converged;
    fit.final_score = score_clip;
  }
  return fit;
}

std::vector<int> smallest_density_indices(const Vector& log_density, double c_hat) {
  const int n = static_cast<int>(log_density.size());
  const int k = static_cast<int>(std::floor(n * (1.0 - c_hat) + 0.5));
  if (k <= 0) return {};
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return log_density[a] < log_density[b];
  });
  idx.resize(std::min(k, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> detect_outliers(const SampleSet& samples, const EnlargedMvnFit& fit,
                                 double gamma) {
  auto st = mvn_score_stats(samples, fit.theta, gamma);
  return smallest_density_indices(st.log_density, fit.c_hat);
}

}  // namespace enlarge
