#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "enlarge/bench.hpp"
#include "enlarge/enlarged_density.hpp"
#include "test_util.hpp"

using namespace enlarge;

namespace {

MvnParams std_normal(int d) {
  MvnParams p;
  p.mean = Vector::Zero(d);
  p.cov = Matrix::Identity(d, d);
  return p;
}

}  // namespace

TEST_CASE("sphere fit: two symmetric points give mean zero") {
  SampleSet s;
  s.points.resize(2, 1);
  s.points << -1.0, 1.0;
  FitOptions opts;
  opts.n_starts = 1;
  auto [theta, diag] = fit_sphere_mvn(s, GammaScoreConfig::sphere(0.1), opts);
  CHECK(std::abs(theta.mean[0]) < 1e-8);
}

TEST_CASE("sphere fit recovers clean bivariate normal") {
  std::mt19937_64 rng(1001);
  auto samples = testutil::sample_mvn(std_normal(2), 5000, rng);
  FitOptions opts;
  auto [theta, diag] = fit_sphere_mvn(samples, GammaScoreConfig::sphere(0.1), opts);
  CHECK(diag.converged);
  CHECK(theta.mean.norm() < 0.05);
  CHECK((theta.cov - Matrix::Identity(2, 2)).norm() < 0.1);
}

TEST_CASE("sphere fit is robust on the contaminated protocol") {
  // n = 50 from N2(0, I) with 20% replaced component-wise by N(10, 10^2).
  std::vector<double> mu_norms, sig_errs;
  for (int rep = 0; rep < 100; ++rep) {
    auto gen = gen_density_synth(9000 + rep, 50, 0.2);
    FitOptions opts;
    opts.seed = rep;
    auto [theta, diag] = fit_sphere_mvn(gen.samples, GammaScoreConfig::sphere(0.1), opts);
    mu_norms.push_back(theta.mean.norm());
    sig_errs.push_back((theta.cov - Matrix::Identity(2, 2)).norm());
  }
  std::nth_element(mu_norms.begin(), mu_norms.begin() + 50, mu_norms.end());
  std::nth_element(sig_errs.begin(), sig_errs.begin() + 50, sig_errs.end());
  CHECK(mu_norms[50] < 0.3);
  CHECK(sig_errs[50] < 0.5);
}

TEST_CASE("power fit recovers clean univariate normal") {
  std::mt19937_64 rng(1003);
  auto samples = testutil::sample_mvn(std_normal(1), 5000, rng);
  FitOptions opts;
  auto [theta, diag] = fit_power_mvn(samples, GammaScoreConfig::power(0.1), opts);
  CHECK(diag.converged);
  CHECK(std::abs(theta.mean[0]) < 0.05);
  CHECK(std::abs(theta.cov(0, 0) - 1.0) < 0.1);
}

TEST_CASE("power fit approaches the MLE as gamma vanishes") {
  std::mt19937_64 rng(1005);
  auto samples = testutil::sample_mvn(std_normal(1), 2000, rng);
  FitOptions opts;
  auto [theta, diag] = fit_power_mvn(samples, GammaScoreConfig::power(1e-4), opts);
  const double mean_mle = samples.points.col(0).mean();
  const double var_mle =
      (samples.points.col(0).array() - mean_mle).square().sum() / samples.n();
  CHECK(std::abs(theta.mean[0] - mean_mle) < 1e-2);
  CHECK(std::abs(theta.cov(0, 0) - var_mle) < 1e-2);
}

TEST_CASE("identical samples give a singular model") {
  SampleSet s;
  s.points.resize(2, 1);
  s.points << 3.0, 3.0;
  FitOptions opts;
  CHECK_THROWS_AS(fit_power_mvn(s, GammaScoreConfig::power(0.1), opts),
                  ModelSingularError);
}

TEST_CASE("monotone descent from the robust start") {
  auto gen = gen_density_synth(77, 50, 0.2);
  auto cfg = GammaScoreConfig::sphere(0.1);
  FitOptions opts;
  opts.n_starts = 1;
  const double start_score = sphere_score(gen.samples, robust_mvn_start(gen.samples), cfg);
  auto [theta, diag] = fit_sphere_mvn(gen.samples, cfg, opts);
  CHECK(diag.final_score <= start_score + 1e-10);
  CHECK(diag.final_score == doctest::Approx(sphere_score(gen.samples, theta, cfg)));
}

TEST_CASE("enlarged fit estimates heavy far-out contamination") {
  std::mt19937_64 rng(1007);
  auto samples = testutil::sample_mvn(std_normal(2), 2000, rng);
  // 40% outliers at +100 sigma: density exactly floors to zero there.
  for (int i = 0; i < 800; ++i) samples.points.row(i) = Eigen::RowVector2d(100.0, 100.0);
  FitOptions opts;
  auto fit = fit_enlarged(samples, GammaScoreConfig::power(0.1), opts);
  CHECK(fit.branch == Branch::Interior);
  CHECK(1.0 - fit.c_hat > 0.35);
  CHECK(1.0 - fit.c_hat < 0.45);
}

TEST_CASE("branch consistency: interior implies sphere stationarity") {
  auto gen = gen_density_synth(55, 200, 0.2);
  auto cfg = GammaScoreConfig::power(0.1);
  FitOptions opts;
  auto fit = fit_enlarged(gen.samples, cfg, opts);
  REQUIRE(fit.branch == Branch::Interior);
  auto prof = profile_c(gen.samples, fit.theta, cfg);
  CHECK(prof.c_raw < 1.0);

  // Central finite differences of the sphere score over all free
  // parameters (mean entries and upper-triangular covariance entries).
  const double scale = std::abs(sphere_score(gen.samples, fit.theta, cfg));
  double grad_norm2 = 0.0;
  const double h = 1e-5;
  auto eval = [&](const MvnParams& p) { return sphere_score(gen.samples, p, cfg); };
  for (int j = 0; j < 2; ++j) {
    MvnParams up = fit.theta, dn = fit.theta;
    up.mean[j] += h;
    dn.mean[j] -= h;
    const double g = (eval(up) - eval(dn)) / (2.0 * h);
    grad_norm2 += g * g;
  }
  for (int a = 0; a < 2; ++a) {
    for (int b = a; b < 2; ++b) {
      MvnParams up = fit.theta, dn = fit.theta;
      up.cov(a, b) += h;
      up.cov(b, a) = up.cov(a, b);
      dn.cov(a, b) -= h;
      dn.cov(b, a) = dn.cov(a, b);
      const double g = (eval(up) - eval(dn)) / (2.0 * h);
      grad_norm2 += g * g;
    }
  }
  CHECK(std::sqrt(grad_norm2) < 1e-4 * scale);
}

TEST_CASE("outlier detection count and ordering") {
  auto gen = gen_density_synth(88, 50, 0.2);
  FitOptions opts;
  auto fit = fit_enlarged(gen.samples, GammaScoreConfig::power(0.1), opts);

  EnlargedMvnFit clean = fit;
  clean.c_hat = 1.0;
  CHECK(detect_outliers(gen.samples, clean, 0.1).empty());

  EnlargedMvnFit forced = fit;
  forced.c_hat = 0.8;
  auto idx = detect_outliers(gen.samples, forced, 0.1);
  REQUIRE(idx.size() == 10);
  // The selected indices carry the 10 smallest fitted densities.
  auto st = mvn_score_stats(gen.samples, fit.theta, 0.1);
  std::vector<double> lp(st.log_density.data(), st.log_density.data() + 50);
  std::vector<double> sorted = lp;
  std::sort(sorted.begin(), sorted.end());
  const double cutoff = sorted[9];
  for (int i : idx) CHECK(lp[i] <= cutoff + 1e-15);
}

TEST_CASE("affine equivariance of the enlarged fit") {
  auto gen = gen_density_synth(99, 120, 0.2);
  auto cfg = GammaScoreConfig::power(0.1);
  FitOptions opts;
  opts.n_starts = 1;
  auto fit = fit_enlarged(gen.samples, cfg, opts);

  Matrix b(2, 2);
  b << 2.0, 0.3, -0.4, 1.5;
  Vector a(2);
  a << 1.0, -2.0;
  SampleSet mapped;
  mapped.points = (gen.samples.points * b.transpose()).rowwise() + a.transpose();
  auto fit2 = fit_enlarged(mapped, cfg, opts);

  CHECK(std::abs(fit2.c_hat - fit.c_hat) < 1e-6);
  Vector mean_mapped = b * fit.theta.mean + a;
  Matrix cov_mapped = b * fit.theta.cov * b.transpose();
  CHECK((fit2.theta.mean - mean_mapped).norm() < 1e-6 * (1.0 + mean_mapped.norm()));
  CHECK((fit2.theta.cov - cov_mapped).norm() < 1e-6 * cov_mapped.norm());
  CHECK(detect_outliers(mapped, fit2, 0.1) == detect_outliers(gen.samples, fit, 0.1));
}

TEST_CASE("single-start fit is deterministic") {
  auto gen = gen_density_synth(123, 80, 0.2);
  FitOptions opts;
  opts.n_starts = 1;
  opts.seed = 42;
  auto f1 = fit_enlarged(gen.samples, GammaScoreConfig::power(0.1), opts);
  auto f2 = fit_enlarged(gen.samples, GammaScoreConfig::power(0.1), opts);
  CHECK(f1.c_hat == f2.c_hat);
  CHECK(f1.theta.mean == f2.theta.mean);
  CHECK(f1.theta.cov == f2.theta.cov);
  CHECK(f1.final_score == f2.final_score);
}
