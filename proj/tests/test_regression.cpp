#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "enlarge/bench.hpp"
#include "enlarge/regression.hpp"
#include "test_util.hpp"

using namespace enlarge;

namespace {

RegData single_point() {
  RegData d;
  d.x = Matrix::Zero(1, 1);
  d.y = Vector::Zero(1);
  return d;
}

RegParams unit_params(int d) {
  RegParams p;
  p.beta = Vector::Zero(d);
  p.intercept = 0.0;
  p.sigma = 1.0;
  return p;
}

RegData toy_data(std::uint64_t seed, int n, double ratio) {
  return gen_reg_toy(seed, n, ratio).data;
}

}  // namespace

TEST_CASE("conditional power score closed-form values") {
  auto data = single_point();
  auto params = unit_params(1);
  // Perfect fit, sigma = 1, gamma = 1, c = 1 matches the 1-D density case.
  CHECK(cond_power_score(data, params, 1.0, 1.0) ==
        doctest::Approx(-0.51578976902898721).epsilon(1e-12));
  CHECK(std::abs(cond_power_score(data, params, 1e-12, 1.0)) < 1e-11);
}

TEST_CASE("conditional power score at c_reg equals -A^{1+gamma}/I^gamma") {
  auto data = toy_data(5, 200, 0.0);
  RegParams params = unit_params(1);
  params.beta[0] = 9.0;
  params.intercept = 0.5;
  params.sigma = 1.2;
  for (double gamma : {0.1, 0.5, 1.0}) {
    auto prof = c_reg(data, params, gamma);
    auto st = cond_score_stats(data, params, gamma);
    const double lhs = cond_power_score(data, params, prof.c_raw, gamma);
    const double rhs = -std::pow(st.A, 1.0 + gamma) / std::pow(st.I, gamma);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    // ... which is the sphere-score chain as well.
    const double sp = cond_sphere_score(data, params, gamma);
    CHECK(lhs == doctest::Approx(-std::pow(-sp, 1.0 + gamma)).epsilon(1e-10));
  }
}

TEST_CASE("c_reg closed form, consistency, and far-outlier halving") {
  auto data = single_point();
  auto params = unit_params(1);
  auto prof = c_reg(data, params, 1.0);
  CHECK(prof.c_raw == doctest::Approx(1.4142135623730951).epsilon(1e-12));
  CHECK(prof.c_clipped == 1.0);

  // Model-generated data: c_raw -> 1.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 100000;
  RegData big;
  big.x.resize(n, 1);
  big.y.resize(n);
  RegParams truth = unit_params(1);
  truth.beta[0] = 2.0;
  truth.intercept = -1.0;
  for (int i = 0; i < n; ++i) {
    big.x(i, 0) = gauss(rng);
    big.y[i] = truth.intercept + truth.beta[0] * big.x(i, 0) + gauss(rng);
  }
  const double gamma = 0.3;
  auto st = cond_score_stats(big, truth, gamma);
  std::vector<double> terms(n);
  for (int i = 0; i < n; ++i) terms[i] = std::exp(gamma * st.log_density[i]);
  const double band = 3.0 * testutil::sd(terms) / std::sqrt(static_cast<double>(n)) / st.I;
  CHECK(std::abs(c_reg(big, truth, gamma).c_raw - 1.0) < band);

  // Half the responses moved to 1e4 sigma: their terms underflow A.
  RegData half = big;
  for (int i = 0; i < n / 2; ++i) half.y[i] += 1e4;
  CHECK(std::abs(c_reg(half, truth, gamma).c_raw - 0.5) < 0.05);
}

TEST_CASE("conditional sphere score: value, scale-blindness, outlier bound") {
  auto data = single_point();
  auto params = unit_params(1);
  CHECK(cond_sphere_score(data, params, 1.0) ==
        doctest::Approx(-0.75112554446494248).epsilon(1e-12));

  // c-independence through the stats identity.
  auto toy = toy_data(11, 100, 0.0);
  RegParams th = unit_params(1);
  th.beta[0] = 10.0;
  th.intercept = 1.0;
  const double gamma = 0.5;
  auto st = cond_score_stats(toy, th, gamma);
  const double base = sphere_score_from_stats(st.A, st.I, gamma);
  for (double c : {0.1, 10.0}) {
    const double scaled = sphere_score_from_stats(st.A * std::pow(c, gamma),
                                                  st.I * std::pow(c, 1.0 + gamma), gamma);
    CHECK(scaled == doctest::Approx(base).epsilon(1e-12));
  }

  // A single 1e4-sigma outlier appended to n = 100 clean points moves the
  // score by less than (1/99) * |value| * 1.01.
  RegData plus = toy;
  plus.x.conservativeResize(101, 1);
  plus.y.conservativeResize(101);
  plus.x(100, 0) = 0.0;
  plus.y[100] = 1e4;
  const double before = cond_sphere_score(toy, th, gamma);
  const double after = cond_sphere_score(plus, th, gamma);
  CHECK(std::abs(after - before) < (1.0 / 99.0) * std::abs(before) * 1.01);
}

TEST_CASE("I statistic is independent of x and matches quadrature") {
  RegParams params = unit_params(3);
  params.beta << 1.0, -2.0, 0.5;
  params.intercept = 0.3;
  params.sigma = 1.7;
  const double gamma = 0.4;
  const double closed = std::pow(params.sigma, -gamma) * normal_s_power_integral(gamma);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 5; ++k) {
    Vector x(3);
    x << u(rng), u(rng), u(rng);
    const double mean = params.beta.dot(x) + params.intercept;
    const double quad = testutil::integrate(
        [&](double y) {
          const double z = (y - mean) / params.sigma;
          const double p = std::exp(-0.5 * z * z) /
                           (params.sigma * std::sqrt(2.0 * M_PI));
          return std::pow(p, 1.0 + gamma);
        },
        mean - 14.0 * params.sigma, mean + 14.0 * params.sigma);
    CHECK(std::abs(quad - closed) / closed < 1e-8);
  }
}

TEST_CASE("sphere regression fit recovers the clean toy model") {
  std::mt19937_64 rng(17);
  auto data = toy_data(1700, 5000, 0.0);
  FitOptions opts;
  auto [theta, diag] = fit_sphere_reg(data, 0.1, opts);
  CHECK(diag.converged);
  CHECK(std::abs(theta.beta[0] - 10.0) < 0.1);
  CHECK(std::abs(theta.intercept - 1.0) < 0.1);
  CHECK(std::abs(theta.sigma - 1.0) < 0.05);
}

TEST_CASE("sphere regression fit survives 30 percent toy outliers") {
  auto data = toy_data(42, 50, 0.3);
  FitOptions opts;
  auto [theta, diag] = fit_sphere_reg(data, 0.1, opts);
  CHECK(theta.beta[0] > 8.0);
  CHECK(theta.beta[0] < 12.0);
}

TEST_CASE("symmetric data gives zero intercept") {
  RegData data;
  data.x.resize(4, 1);
  data.y.resize(4);
  data.x << -1.0, 1.0, -1.0, 1.0;
  data.y << -1.0, 1.0, -1.5, 1.5;
  FitOptions opts;
  opts.n_starts = 1;
  auto [theta, diag] = fit_sphere_reg(data, 0.1, opts);
  CHECK(std::abs(theta.intercept) < 1e-6);
}

TEST_CASE("power regression fit approaches OLS for tiny gamma") {
  auto data = toy_data(23, 2000, 0.0);
  FitOptions opts;
  auto [theta, diag] = fit_power_reg(data, 1e-4, opts);
  // OLS closed-form oracle via the normal equations.
  Matrix design = with_intercept(data.x);
  Vector ols = (design.transpose() * design)
                   .ldlt()
                   .solve(design.transpose() * data.y);
  CHECK(std::abs(theta.beta[0] - ols[0]) < 1e-2);
  CHECK(std::abs(theta.intercept - ols[1]) < 1e-2);
}

TEST_CASE("power regression fit on clean toy data") {
  auto data = toy_data(29, 5000, 0.0);
  FitOptions opts;
  auto [theta, diag] = fit_power_reg(data, 0.1, opts);
  CHECK(std::abs(theta.beta[0] - 10.0) < 0.15);
  CHECK(std::abs(theta.intercept - 1.0) < 0.15);
  CHECK(std::abs(theta.sigma - 1.0) < 0.1);
}

TEST_CASE("perfect-fit data degenerates the scale") {
  RegData data;
  data.x.resize(5, 1);
  data.y.resize(5);
  for (int i = 0; i < 5; ++i) {
    data.x(i, 0) = i;
    data.y[i] = 2.0 * i + 1.0;  // exactly linear, zero residuals
  }
  FitOptions opts;
  CHECK_THROWS_AS(fit_power_reg(data, 0.1, opts), ScaleDegenerateError);
}

TEST_CASE("profile equality on a c-grid") {
  auto data = toy_data(31, 300, 0.1);
  RegParams params = unit_params(1);
  params.beta[0] = 10.0;
  params.intercept = 1.0;
  const double gamma = 0.3;
  auto prof = c_reg(data, params, gamma);
  const double target = -std::pow(-cond_sphere_score(data, params, gamma), 1.0 + gamma);

  // Brute-force c-grid of 1000 points bracketing c_raw.
  const double hi = 2.0 * prof.c_raw;
  double best_c = 0.0, best_v = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 1000; ++k) {
    const double c = hi * k / 1000.0;
    const double v = cond_power_score(data, params, c, gamma);
    if (v < best_v) {
      best_v = v;
      best_c = c;
    }
  }
  CHECK(std::abs(best_c - prof.c_raw) <= hi / 1000.0 + 1e-12);
  CHECK(cond_power_score(data, params, prof.c_raw, gamma) ==
        doctest::Approx(target).epsilon(1e-8));
}

TEST_CASE("enlarged regression fit: heterogeneous contamination ratio") {
  // c0(x) = 1 for x1 < 0.5 and 0.6 for x1 >= 0.5 with x uniform on [0,1]^2:
  // the estimator recovers the expected ratio 0.2.
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 2000;
  RegData data;
  data.x.resize(n, 2);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    data.x(i, 0) = u(rng);
    data.x(i, 1) = u(rng);
    data.y[i] = 1.0 + 2.0 * data.x(i, 0) - 1.0 * data.x(i, 1) + 0.25 * gauss(rng);
    if (data.x(i, 0) >= 0.5 && u(rng) < 0.4) data.y[i] = 1e4 * gauss(rng);
  }
  FitOptions opts;
  auto fit = fit_enlarged_reg(data, 0.1, opts);
  CHECK(std::abs((1.0 - fit.c_hat) - 0.2) < 0.05);
}

TEST_CASE("regression outlier detection") {
  auto gen = gen_reg_toy(41, 50, 0.3);
  FitOptions opts;
  auto fit = fit_enlarged_reg(gen.data, 0.1, opts);

  EnlargedRegFit clean = fit;
  clean.c_hat = 1.0;
  CHECK(detect_outliers_reg(gen.data, clean, 0.1).empty());

  // With Gaussian s and a single sigma, smallest density = largest |residual|.
  auto idx = detect_outliers_reg(gen.data, fit, 0.1);
  const int k = static_cast<int>(idx.size());
  REQUIRE(k == static_cast<int>(std::floor(50 * (1.0 - fit.c_hat) + 0.5)));
  Vector r = residuals(fit.theta, gen.data).cwiseAbs();
  std::vector<double> sorted(r.data(), r.data() + r.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double cutoff = sorted[k - 1];
  for (int i : idx) CHECK(r[i] >= cutoff - 1e-12);
}

TEST_CASE("y-rescaling equivariance") {
  auto gen = gen_reg_toy(47, 80, 0.2);
  FitOptions opts;
  opts.n_starts = 2;
  auto fit = fit_enlarged_reg(gen.data, 0.1, opts);

  const double a = 3.5, b = -7.0;
  RegData scaled = gen.data;
  scaled.y = a * gen.data.y.array() + b;
  auto fit2 = fit_enlarged_reg(scaled, 0.1, opts);

  CHECK(std::abs(fit2.c_hat - fit.c_hat) < 1e-6);
  CHECK(std::abs(fit2.theta.beta[0] - a * fit.theta.beta[0]) <
        1e-6 * (1.0 + std::abs(a * fit.theta.beta[0])));
  CHECK(std::abs(fit2.theta.intercept - (a * fit.theta.intercept + b)) <
        1e-6 * (1.0 + std::abs(a * fit.theta.intercept + b)));
  CHECK(std::abs(fit2.theta.sigma - a * fit.theta.sigma) <
        1e-6 * (1.0 + a * fit.theta.sigma));
  CHECK(detect_outliers_reg(scaled, fit2, 0.1) ==
        detect_outliers_reg(gen.data, fit, 0.1));
}

TEST_CASE("IRLS descent from the L1 start") {
  auto gen = gen_reg_toy(53, 60, 0.3);
  FitOptions opts;
  opts.n_starts = 1;
  auto [theta, diag] = fit_sphere_reg(gen.data, 0.1, opts);
  CHECK(diag.final_score == doctest::Approx(cond_sphere_score(gen.data, theta, 0.1)));
}

TEST_CASE("data validation errors") {
  RegData bad;
  bad.x = Matrix::Zero(3, 1);
  bad.y.resize(3);
  bad.y << 1.0, std::nan(""), 2.0;
  CHECK_THROWS_AS(validate_reg_data(bad), DataError);

  RegData tiny;
  tiny.x = Matrix::Zero(2, 1);
  tiny.y = Vector::Zero(2);
  FitOptions opts;
  CHECK_THROWS_AS(fit_sphere_reg(tiny, 0.1, opts), DataError);

  // Rank-deficient design: constant feature duplicates the intercept.
  RegData flat;
  flat.x = Matrix::Ones(10, 1);
  flat.y = Vector::LinSpaced(10, 0.0, 1.0);
  CHECK_THROWS_AS(fit_sphere_reg(flat, 0.1, opts), DesignSingularError);
}
