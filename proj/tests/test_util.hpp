#pragma once

// Shared test helpers: adaptive quadrature oracles (independent of the
// library's closed forms) and normal sampling.

#include <cmath>
#include <functional>
#include <random>

#include "enlarge/mvn.hpp"

namespace testutil {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double eps, double whole, int depth) {
  const double c = 0.5 * (a + b);
  const double left = simpson(f, a, c);
  const double right = simpson(f, c, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, c, eps / 2.0, left, depth - 1) +
         adaptive_simpson(f, c, b, eps / 2.0, right, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-10) {
  return adaptive_simpson(f, a, b, eps, simpson(f, a, b), 40);
}

inline double integrate2d(const std::function<double(double, double)>& f, double lo,
                          double hi, double eps = 1e-11) {
  return integrate(
      [&](double x) {
        return integrate([&, x](double y) { return f(x, y); }, lo, hi, eps / 100.0);
      },
      lo, hi, eps);
}

inline enlarge::SampleSet sample_mvn(const enlarge::MvnParams& params, int n,
                                     std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = params.dim();
  Eigen::LLT<enlarge::Matrix> llt(params.cov);
  enlarge::SampleSet out;
  out.points.resize(n, d);
  enlarge::Vector z(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z[j] = gauss(rng);
    out.points.row(i) = (params.mean + llt.matrixL() * z).transpose();
  }
  return out;
}

inline double sd(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / (v.size() - 1));
}

}  // namespace testutil
