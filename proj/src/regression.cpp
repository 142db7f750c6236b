#include "enlarge/regression.hpp"

#include <cmath>

#include "enlarge/baselines.hpp"
#include "enlarge/rng.hpp"
#include "enlarge/scores.hpp"
#include "enlarge/stats_util.hpp"

namespace enlarge {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

struct RegState {
  RegParams params;
  CondScoreStats st;
  double score = 0.0;
};

double param_change(const RegParams& a, const RegParams& b) {
  double d = std::abs(a.intercept - b.intercept);
  d = std::max(d, std::abs(a.sigma - b.sigma));
  d = std::max(d, (a.beta - b.beta).cwiseAbs().maxCoeff());
  return d;
}

RegParams lerp(const RegParams& a, const RegParams& b, double t) {
  RegParams out;
  out.beta = a.beta + t * (b.beta - a.beta);
  out.intercept = a.intercept + t * (b.intercept - a.intercept);
  out.sigma = a.sigma + t * (b.sigma - a.sigma);
  return out;
}

bool gamma_weights_reg(const Vector& log_density, double gamma, Vector* w) {
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

enum class Driver { Sphere, Power };

double driving_score(const CondScoreStats& st, double gamma, Driver driver) {
  if (driver == Driver::Sphere) return sphere_score_from_stats(st.A, st.I, gamma);
  return power_score_from_stats(st.A, st.I, 1.0, gamma);
}

std::pair<RegParams, FitDiagnostics> fit_reg_from_start(const RegData& data,
                                                        double gamma, Driver driver,
                                                        RegParams cur,
                                                        const FitOptions& opts) {
  const double floor = sigma_floor(data);
  const Matrix design = with_intercept(data.x);
  CondScoreStats st = cond_score_stats(data, cur, gamma);
  double score = driving_score(st, gamma, driver);

  FitDiagnostics diag;
  for (int it = 0; it < opts.max_iter; ++it) {
    diag.iterations = it + 1;
    Vector w;
    if (!gamma_weights_reg(st.log_density, gamma, &w)) {
      throw DegenerateScoreError("all conditional densities underflowed to zero");
    }
    Vector coef = solve_wls(design, data.y, w);
    RegParams prop;
    prop.beta = coef.head(data.dim());
    prop.intercept = coef[data.dim()];
    Vector r = residuals(prop, data);
    double wr2 = 0.0;
    for (int i = 0; i < data.n(); ++i) wr2 += w[i] * r[i] * r[i];
    if (driver == Driver::Sphere) {
      prop.sigma = std::sqrt((1.0 + gamma) * wr2);
    } else {
      // Stationarity of the power score at c = 1:
      // sigma^2 = (1+gamma) A sum w r^2 / ((1+gamma) A - gamma I).
      const double denom = (1.0 + gamma) * st.A - gamma * st.I;
      const double factor =
          denom > 0.0 ? (1.0 + gamma) * st.A / denom : 1.0 + gamma;
      prop.sigma = std::sqrt(factor * wr2);
    }
    if (!(prop.sigma > floor)) {
      throw ScaleDegenerateError("residual scale collapsed to the floor");
    }

    const double slack = 1e-12 * (1.0 + std::abs(score));
    RegParams cand = prop;
    CondScoreStats st_cand = cond_score_stats(data, cand, gamma);
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
        st_cand = cond_score_stats(data, cand, gamma);
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

RegParams l1_start(const RegData& data, const FitOptions& opts) {
  BaselineKind l1;
  l1.kind = BaselineMethod::L1;
  RegParams init = fit_baseline(data, l1, opts);
  Vector r = residuals(init, data);
  std::vector<double> rv(r.data(), r.data() + r.size());
  double scale = 1.4826 * mad_of(rv);
  const double floor = sigma_floor(data);
  init.sigma = std::max(scale, 10.0 * floor + 1e-12);
  return init;
}

RegParams perturb_reg_start(const RegParams& base, const RegData& data, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-0.4, 0.4);
  RegParams out = base;
  for (int j = 0; j < data.dim(); ++j) {
    std::vector<double> col(data.x.col(j).data(), data.x.col(j).data() + data.n());
    double sx = 1.4826 * mad_of(col);
    if (!(sx > 0.0)) sx = 1.0;
    out.beta[j] += 0.5 * base.sigma / sx * gauss(rng);
  }
  out.intercept += 0.5 * base.sigma * gauss(rng);
  out.sigma *= std::exp(unif(rng));
  return out;
}

std::pair<RegParams, FitDiagnostics> fit_reg_multistart(const RegData& data,
                                                        double gamma, Driver driver,
                                                        const FitOptions& opts) {
  validate_reg_data(data);
  if (data.n() < data.dim() + 2) throw DataError("need n >= d + 2 samples to fit");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (opts.max_iter < 1 || !(opts.tol > 0.0) || opts.n_starts < 1) {
    throw ConfigError("invalid fit options");
  }
  const RegParams base = l1_start(data, opts);
  std::pair<RegParams, FitDiagnostics> best;
  bool have = false;
  for (int s = 0; s < opts.n_starts; ++s) {
    RegParams init = base;
    if (s > 0) {
      Rng rng(split_seed(opts.seed, static_cast<std::uint64_t>(s),
                         driver == Driver::Sphere ? 3 : 4));
      init = perturb_reg_start(base, data, rng);
    }
    try {
      auto fit = fit_reg_from_start(data, gamma, driver, init, opts);
      if (!have || fit.second.final_score < best.second.final_score) {
        best = fit;
        have = true;
      }
    } catch (const DegenerateScoreError&) {
      // Try the remaining starts.
    }
  }
  if (!have) throw DegenerateScoreError("every start degenerated");
  return best;
}

}  // namespace

void validate_reg_data(const RegData& data) {
  if (data.y.size() != data.x.rows()) {
    throw DataError("x and y row counts differ");
  }
  if (!data.x.allFinite() || !data.y.allFinite()) {
    throw DataError("regression data contains NaN or Inf entries");
  }
  if (data.n() < 1) throw DataError("regression data is empty");
}

Matrix with_intercept(const Matrix& x) {
  Matrix design(x.rows(), x.cols() + 1);
  design.leftCols(x.cols()) = x;
  design.col(x.cols()).setOnes();
  return design;
}

Vector solve_wls(const Matrix& design, const Vector& y, const Vector& w) {
  const int n = static_cast<int>(design.rows());
  const int p = static_cast<int>(design.cols());
  Matrix zs(n, p);
  Vector ys(n);
  for (int i = 0; i < n; ++i) {
    const double sw = std::sqrt(std::max(w[i], 0.0));
    zs.row(i) = sw * design.row(i);
    ys[i] = sw * y[i];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(zs);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    throw DesignSingularError("weighted design matrix is rank deficient");
  }
  return qr.solve(ys);
}

double normal_s_power_integral(double gamma) {
  return std::exp(-0.5 * gamma * kLog2Pi - 0.5 * std::log1p(gamma));
}

double sigma_floor(const RegData& data) {
  std::vector<double> yv(data.y.data(), data.y.data() + data.y.size());
  return 1e-8 * (mad_of(yv) + 1e-12);
}

CondScoreStats cond_score_stats(const RegData& data, const RegParams& params,
                                double gamma, double s_integral) {
  validate_reg_data(data);
  if (params.beta.size() != data.dim()) {
    throw DataError("coefficient dimension does not match data");
  }
  if (!(params.sigma > sigma_floor(data))) {
    throw ScaleDegenerateError("sigma is at the numerical floor");
  }
  const int n = data.n();
  CondScoreStats st;
  st.log_density.resize(n);
  Vector r = residuals(params, data);
  const double lognorm = -std::log(params.sigma) - 0.5 * kLog2Pi;
  for (int i = 0; i < n; ++i) {
    const double z = r[i] / params.sigma;
    st.log_density[i] = lognorm - 0.5 * z * z;
  }
  st.A = power_mean_from_log(st.log_density, gamma);
  const double s_int = s_integral > 0.0 ? s_integral : normal_s_power_integral(gamma);
  st.I = std::pow(params.sigma, -gamma) * s_int;
  return st;
}

double cond_power_score(const RegData& data, const RegParams& params, double c,
                        double gamma) {
  if (!(c > 0.0)) throw ConfigError("scale c must be positive");
  auto st = cond_score_stats(data, params, gamma);
  return power_score_from_stats(st.A, st.I, c, gamma);
}

double cond_sphere_score(const RegData& data, const RegParams& params,
                         double gamma) {
  auto st = cond_score_stats(data, params, gamma);
  return sphere_score_from_stats(st.A, st.I, gamma);
}

ProfileC c_reg(const RegData& data, const RegParams& params, double gamma) {
  auto st = cond_score_stats(data, params, gamma);
  if (!(st.A > 0.0)) {
    throw DegenerateScoreError("all conditional densities underflowed to zero");
  }
  const double c_raw = st.A / st.I;
  return {c_raw, std::min(1.0, c_raw)};
}

std::pair<RegParams, FitDiagnostics> fit_sphere_reg(const RegData& data,
                                                    double gamma,
                                                    const FitOptions& opts) {
  return fit_reg_multistart(data, gamma, Driver::Sphere, opts);
}

std::pair<RegParams, FitDiagnostics> fit_power_reg(const RegData& data,
                                                   double gamma,
                                                   const FitOptions& opts) {
  return fit_reg_multistart(data, gamma, Driver::Power, opts);
}

EnlargedRegFit fit_enlarged_reg(const RegData& data, double gamma,
                                const FitOptions& opts) {
  auto [theta_sphere, diag_sphere] = fit_sphere_reg(data, gamma, opts);
  auto prof = c_reg(data, theta_sphere, gamma);

  EnlargedRegFit fit;
  if (prof.c_raw <= 1.0) {
    fit.c_hat = prof.c_raw;
    fit.theta = theta_sphere;
    fit.branch = Branch::Interior;
    fit.iterations = diag_sphere.iterations;
    fit.converged = diag_sphere.converged;
    fit.final_score = cond_power_score(data, fit.theta, fit.c_hat, gamma);
    return fit;
  }

  auto [theta_power, diag_power] = fit_power_reg(data, gamma, opts);
  const double score_power = cond_power_score(data, theta_power, 1.0, gamma);
  const double score_clip = cond_power_score(data, theta_sphere, 1.0, gamma);
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

std::vector<int> detect_outliers_reg(const RegData& data,
                                     const EnlargedRegFit& fit, double gamma) {
  auto st = cond_score_stats(data, fit.theta, gamma);
  return smallest_density_indices(st.log_density, fit.c_hat);
}

}  // namespace enlarge
